//! Piecewise-affine model systems with exact derivative data.
//!
//! Every model lives in the unit cube `[0,1]^n` (optionally wrapped into the
//! n-torus) and is a finite list of affine branches on closed axis-aligned
//! boxes. Points on shared boundaries resolve to the lowest symbol.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Matrix;
#[allow(unused_imports)]
use crate::math::Float;
use crate::symbolic::TransitionMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Geometry {
    /// `[0,1]^n` with the sup-norm.
    Cube,
    /// `R^n / Z^n`, coordinates wrapped mod 1.
    Torus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AmbientSpace {
    pub dim: usize,
    pub geometry: Geometry,
}

impl AmbientSpace {
    pub fn new(dim: usize, geometry: Geometry) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidModel("ambient dimension must be at least 1".into()));
        }
        Ok(Self { dim, geometry })
    }

    /// Brings a point into canonical coordinates (mod 1 on the torus).
    #[inline]
    pub fn wrap(&self, p: &mut [f64]) {
        if self.geometry == Geometry::Torus {
            for x in p.iter_mut() {
                *x -= x.floor();
                // -tiny wraps to exactly 1.0 in floating point.
                if *x >= 1.0 {
                    *x = 0.0;
                }
            }
        }
    }

    /// Coordinate difference under this geometry.
    #[inline]
    pub fn coord_distance(&self, a: f64, b: f64) -> f64 {
        let d = (a - b).abs();
        match self.geometry {
            Geometry::Cube => d,
            Geometry::Torus => {
                let d = d - d.floor();
                d.min(1.0 - d)
            }
        }
    }

    /// Sup-norm distance between two points.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| self.coord_distance(x, y))
            .fold(0.0, f64::max)
    }
}

/// Closed axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Rect {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Rect {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        debug_assert_eq!(lo.len(), hi.len());
        Self { lo, hi }
    }

    pub fn unit(dim: usize) -> Self {
        Self { lo: vec![0.0; dim], hi: vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(l, h)| l > h)
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&x, (&l, &h))| l <= x && x <= h)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    /// Largest edge length (sup-norm diameter).
    pub fn diameter(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| h - l)
            .fold(0.0, f64::max)
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| (h - l).max(0.0)).product()
    }

    pub fn intersect(&self, other: &Rect) -> Rect {
        Rect {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(*b)).collect(),
        }
    }

    pub fn is_unit(&self) -> bool {
        self.lo.iter().all(|&l| l == 0.0) && self.hi.iter().all(|&h| h == 1.0)
    }

    /// Sup-norm distance from `p` to the box, wrapping on the torus.
    pub fn distance_to(&self, p: &[f64], geometry: Geometry) -> f64 {
        let mut d = 0.0f64;
        for ((&x, &l), &h) in p.iter().zip(&self.lo).zip(&self.hi) {
            let c = match geometry {
                Geometry::Cube => interval_gap(x, l, h),
                Geometry::Torus => {
                    if h - l >= 1.0 {
                        0.0
                    } else {
                        interval_gap(x, l, h)
                            .min(interval_gap(x + 1.0, l, h))
                            .min(interval_gap(x - 1.0, l, h))
                    }
                }
            };
            d = d.max(c);
        }
        d
    }
}

#[inline]
fn interval_gap(x: f64, lo: f64, hi: f64) -> f64 {
    if x < lo {
        lo - x
    } else if x > hi {
        x - hi
    } else {
        0.0
    }
}

/// One affine piece `x -> linear * x + offset` on a closed box.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AffineBranch {
    pub symbol: usize,
    pub domain: Rect,
    pub linear: Matrix,
    pub offset: Vec<f64>,
}

impl AffineBranch {
    /// Image of `p` without torus wrapping.
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let mut out = self.linear.apply(p);
        out.iter_mut().zip(&self.offset).for_each(|(o, b)| *o += b);
        out
    }

    #[inline]
    fn apply_into(&self, p: &[f64], out: &mut [f64]) {
        let n = p.len();
        let m = self.linear.as_slice();
        for i in 0..n {
            let mut acc = self.offset[i];
            for j in 0..n {
                acc += m[i * n + j] * p[j];
            }
            out[i] = acc;
        }
    }

    /// Preimage of `q` under the affine map (no domain check).
    pub fn invert(&self, q: &[f64]) -> Option<Vec<f64>> {
        let inv = self.linear.inverse()?;
        let shifted: Vec<f64> = q.iter().zip(&self.offset).map(|(a, b)| a - b).collect();
        Some(inv.apply(&shifted))
    }

    /// Composition `other ∘ self`.
    fn then(&self, other: &AffineBranch) -> (Matrix, Vec<f64>) {
        let linear = other.linear.mul(&self.linear);
        let mut offset = other.linear.apply(&self.offset);
        offset.iter_mut().zip(&other.offset).for_each(|(o, b)| *o += b);
        (linear, offset)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ModelKind {
    #[cfg_attr(feature = "serde", serde(rename = "diffeo"))]
    Diffeomorphism,
    #[cfg_attr(feature = "serde", serde(rename = "expanding"))]
    Expanding,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Diffeomorphism => "diffeo",
            ModelKind::Expanding => "expanding",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PotentialLabel {
    /// `-log |det Df|E^u|`
    PhiU,
    /// `log |det Df|E^s|`
    PhiS,
    /// `-log |det Df|`
    Phi,
    Custom,
}

impl PotentialLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            PotentialLabel::PhiU => "phi_u",
            PotentialLabel::PhiS => "phi_s",
            PotentialLabel::Phi => "phi",
            PotentialLabel::Custom => "custom",
        }
    }
}

/// Locally constant potential: one value per symbol.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Potential {
    pub label: PotentialLabel,
    pub values: Vec<f64>,
}

impl Potential {
    pub fn custom(values: Vec<f64>) -> Self {
        Self { label: PotentialLabel::Custom, values }
    }

    pub fn zero(symbols: usize) -> Self {
        Self::custom(vec![0.0; symbols])
    }

    /// `self + c`
    pub fn shifted(&self, c: f64) -> Self {
        Self::custom(self.values.iter().map(|v| v + c).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// How the symbolic cylinders of a model can be realized as boxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CylinderGeometry {
    /// Every branch domain is the whole torus; every cylinder is the torus.
    Full,
    /// All linear parts are diagonal; cylinders are boxes.
    Diagonal,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ModelSystem {
    pub name: String,
    pub space: AmbientSpace,
    pub kind: ModelKind,
    pub branches: Vec<AffineBranch>,
    pub unstable_dim: usize,
    pub stable_dim: usize,
    pub transition: TransitionMatrix,
    /// `|det Df|E^u|` per branch.
    pub lambda_u: Vec<f64>,
    /// `|det Df|E^s|` per branch (1 for expanding models).
    pub lambda_s: Vec<f64>,
}

impl ModelSystem {
    /// Validates the parts and derives the per-branch Jacobian magnitudes.
    ///
    /// Hyperbolicity itself is not verified: the unstable Jacobian is taken
    /// as the product of the `unstable_dim` largest eigenvalue moduli.
    pub fn new(
        name: impl Into<String>,
        space: AmbientSpace,
        kind: ModelKind,
        mut branches: Vec<AffineBranch>,
        unstable_dim: usize,
        transition: TransitionMatrix,
    ) -> Result<Self> {
        let n = space.dim;
        if branches.is_empty() {
            return Err(Error::InvalidModel("model needs at least one branch".into()));
        }
        branches.sort_by_key(|b| b.symbol);
        for (i, b) in branches.iter().enumerate() {
            if b.symbol != i {
                return Err(Error::InvalidModel(format!(
                    "branch symbols must be 0..{} without gaps",
                    branches.len()
                )));
            }
            if b.linear.dim() != n || b.offset.len() != n || b.domain.dim() != n {
                return Err(Error::InvalidModel(format!("branch {i} has wrong dimensions")));
            }
            if b.domain.is_empty() || !Rect::unit(n).intersect(&b.domain).eq(&b.domain) {
                return Err(Error::InvalidModel(format!(
                    "branch {i} domain must be a nonempty box inside the unit cube"
                )));
            }
        }
        if transition.size() != branches.len() {
            return Err(Error::InvalidModel(format!(
                "transition matrix is {0}x{0} but there are {1} branches",
                transition.size(),
                branches.len()
            )));
        }
        let stable_dim = match kind {
            ModelKind::Expanding if unstable_dim != n => {
                return Err(Error::InvalidModel("expanding models need unstable_dim = n".into()))
            }
            ModelKind::Expanding => 0,
            ModelKind::Diffeomorphism if unstable_dim > n => {
                return Err(Error::InvalidModel("unstable_dim exceeds ambient dimension".into()))
            }
            ModelKind::Diffeomorphism => n - unstable_dim,
        };

        let mut lambda_u = Vec::with_capacity(branches.len());
        let mut lambda_s = Vec::with_capacity(branches.len());
        for (i, b) in branches.iter().enumerate() {
            if kind == ModelKind::Diffeomorphism && b.linear.det() == 0.0 {
                return Err(Error::InvalidModel(format!("branch {i} linear part is singular")));
            }
            let moduli = b.linear.eigenvalue_moduli().ok_or_else(|| {
                Error::UnsupportedGeometry(format!(
                    "branch {i}: eigenvalues only supported for triangular or 2x2 linear parts"
                ))
            })?;
            let lu: f64 = moduli[..unstable_dim].iter().product();
            let ls: f64 = moduli[unstable_dim..].iter().product();
            if lu <= 1.0 {
                return Err(Error::InvalidModel(format!(
                    "branch {i}: unstable Jacobian {lu} is not expanding"
                )));
            }
            if stable_dim > 0 && ls >= 1.0 {
                return Err(Error::InvalidModel(format!(
                    "branch {i}: stable Jacobian {ls} is not contracting"
                )));
            }
            lambda_u.push(lu);
            lambda_s.push(if stable_dim == 0 { 1.0 } else { ls });
        }

        Ok(Self {
            name: name.into(),
            space,
            kind,
            branches,
            unstable_dim,
            stable_dim,
            transition,
            lambda_u,
            lambda_s,
        })
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn symbols(&self) -> usize {
        self.branches.len()
    }

    /// Index of the branch whose domain contains `p` (lowest symbol wins).
    #[inline]
    pub fn branch_at(&self, p: &[f64]) -> Option<usize> {
        self.branches.iter().position(|b| b.domain.contains(p))
    }

    /// Image of `p`, or `NoBranch` when `p` has left the working region.
    pub fn evaluate(&self, point: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.step(point, &mut out).ok_or(Error::NoBranch)?;
        Ok(out)
    }

    /// Allocation-free `evaluate`; returns the branch used.
    #[inline]
    pub fn step(&self, point: &[f64], out: &mut [f64]) -> Option<usize> {
        let mut p = [0.0f64; 8];
        let p = if self.space.geometry == Geometry::Torus && point.len() <= 8 {
            let p = &mut p[..point.len()];
            p.copy_from_slice(point);
            self.space.wrap(p);
            &*p
        } else {
            point
        };
        let i = self.branch_at(p)?;
        self.branches[i].apply_into(p, out);
        self.space.wrap(out);
        Some(i)
    }

    /// `Df` at `p` (constant per branch).
    pub fn jacobian(&self, point: &[f64]) -> Result<Matrix> {
        let mut p = point.to_vec();
        self.space.wrap(&mut p);
        let i = self.branch_at(&p).ok_or(Error::NoBranch)?;
        Ok(self.branches[i].linear.clone())
    }

    pub fn potential(&self, label: PotentialLabel) -> Result<Potential> {
        let values = match label {
            PotentialLabel::PhiU => self.lambda_u.iter().map(|l| -l.ln()).collect(),
            PotentialLabel::PhiS => {
                if self.kind != ModelKind::Diffeomorphism {
                    return Err(Error::IncompatibleLabel {
                        label: label.as_str(),
                        kind: self.kind.as_str(),
                    });
                }
                self.lambda_s.iter().map(|l| l.ln()).collect()
            }
            PotentialLabel::Phi => {
                self.branches.iter().map(|b| -b.linear.det().abs().ln()).collect()
            }
            PotentialLabel::Custom => {
                return Err(Error::IncompatibleLabel { label: label.as_str(), kind: self.kind.as_str() })
            }
        };
        Ok(Potential { label, values })
    }

    /// The potential whose pressure decides the dimension bound: `phi_u` for
    /// diffeomorphisms, `phi` for expanding maps (the two agree there).
    pub fn unstable_potential(&self) -> Potential {
        let label = match self.kind {
            ModelKind::Diffeomorphism => PotentialLabel::PhiU,
            ModelKind::Expanding => PotentialLabel::Phi,
        };
        self.potential(label).expect("phi_u and phi are defined for every kind")
    }

    pub fn cylinder_geometry(&self) -> Result<CylinderGeometry> {
        if self.space.geometry == Geometry::Torus && self.branches.iter().all(|b| b.domain.is_unit()) {
            return Ok(CylinderGeometry::Full);
        }
        if self.branches.iter().all(|b| b.linear.is_diagonal()) {
            return Ok(CylinderGeometry::Diagonal);
        }
        Err(Error::UnsupportedGeometry(
            "cylinders need diagonal linear parts or full-torus branch domains".into(),
        ))
    }

    /// Box of points whose first `word.len()` iterates follow `word`.
    pub fn cylinder_rect(&self, word: &[usize]) -> Result<Option<Rect>> {
        let n = self.dim();
        match self.cylinder_geometry()? {
            CylinderGeometry::Full => Ok(Some(Rect::unit(n))),
            CylinderGeometry::Diagonal => {
                let Some((&last, rest)) = word.split_last() else {
                    return Ok(Some(Rect::unit(n)));
                };
                let mut rect = self.branches[last].domain.clone();
                for &s in rest.iter().rev() {
                    let b = &self.branches[s];
                    rect = b.domain.intersect(&diagonal_preimage(b, &rect));
                    if rect.is_empty() {
                        return Ok(None);
                    }
                }
                Ok(Some(rect))
            }
        }
    }

    /// Minimal one-step separation between distinct branches: the smallest
    /// sup-distance between two domains, or between domain centres when the
    /// domains touch. Zero when two branches share a domain.
    pub fn branch_separation(&self) -> f64 {
        let g = self.space.geometry;
        let mut best = f64::INFINITY;
        for (i, a) in self.branches.iter().enumerate() {
            for b in &self.branches[i + 1..] {
                let gap = rect_gap(&a.domain, &b.domain, g);
                let sep = if gap > 0.0 {
                    gap
                } else {
                    self.space.distance(&a.domain.center(), &b.domain.center())
                };
                best = best.min(sep);
            }
        }
        if best.is_finite() {
            best
        } else {
            1.0
        }
    }

    /// Largest gap between branch domains, used for the default epsilon.
    pub fn min_branch_gap(&self) -> f64 {
        let g = self.space.geometry;
        let mut best = f64::INFINITY;
        for (i, a) in self.branches.iter().enumerate() {
            for b in &self.branches[i + 1..] {
                best = best.min(rect_gap(&a.domain, &b.domain, g));
            }
        }
        if best.is_finite() {
            best
        } else {
            0.0
        }
    }

    /// The `m`-th iterate as a model whose symbols are admissible `m`-words.
    pub fn power(&self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::ParameterOutOfRange("power must be at least 1".into()));
        }
        if m == 1 {
            return Ok(self.clone());
        }
        let words = self.transition.admissible_words(m)?;
        let mut branches = Vec::with_capacity(words.len());
        for (idx, w) in words.iter().enumerate() {
            let domain = self
                .cylinder_rect(w)?
                .ok_or_else(|| Error::InvalidModel("admissible word with empty cylinder".into()))?;
            let mut linear = self.branches[w[0]].linear.clone();
            let mut offset = self.branches[w[0]].offset.clone();
            for &s in &w[1..] {
                let cur = AffineBranch { symbol: 0, domain: domain.clone(), linear, offset };
                let (l, o) = cur.then(&self.branches[s]);
                linear = l;
                offset = o;
            }
            branches.push(AffineBranch { symbol: idx, domain, linear, offset });
        }
        let k = words.len();
        let mut rows = vec![vec![0u8; k]; k];
        for (i, u) in words.iter().enumerate() {
            for (j, v) in words.iter().enumerate() {
                rows[i][j] = self.transition.get(u[m - 1], v[0]) as u8;
            }
        }
        let transition = TransitionMatrix::from_rows(&rows)?;
        Self::new(
            format!("{}^{}", self.name, m),
            self.space,
            self.kind,
            branches,
            self.unstable_dim,
            transition,
        )
    }

    /// Inverse branch map; identity check for diffeomorphisms.
    pub fn invert_branch(&self, symbol: usize, q: &[f64]) -> Option<Vec<f64>> {
        self.branches.get(symbol)?.invert(q)
    }
}

/// Preimage of `rect` under a branch with diagonal linear part.
pub(crate) fn diagonal_preimage(b: &AffineBranch, rect: &Rect) -> Rect {
    let n = rect.dim();
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for c in 0..n {
        let l = b.linear[(c, c)];
        let a = (rect.lo[c] - b.offset[c]) / l;
        let z = (rect.hi[c] - b.offset[c]) / l;
        lo.push(a.min(z));
        hi.push(a.max(z));
    }
    Rect { lo, hi }
}

/// Image of `rect` under a branch with diagonal linear part.
pub(crate) fn diagonal_image(b: &AffineBranch, rect: &Rect) -> Rect {
    let n = rect.dim();
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for c in 0..n {
        let l = b.linear[(c, c)];
        let a = l * rect.lo[c] + b.offset[c];
        let z = l * rect.hi[c] + b.offset[c];
        lo.push(a.min(z));
        hi.push(a.max(z));
    }
    Rect { lo, hi }
}

fn rect_gap(a: &Rect, b: &Rect, g: Geometry) -> f64 {
    let mut d = 0.0f64;
    for c in 0..a.dim() {
        let gap = if a.hi[c] < b.lo[c] {
            b.lo[c] - a.hi[c]
        } else if b.hi[c] < a.lo[c] {
            a.lo[c] - b.hi[c]
        } else {
            0.0
        };
        let gap = match g {
            Geometry::Cube => gap,
            // The wrap-around gap is 1 - (span of both boxes).
            Geometry::Torus if gap > 0.0 => {
                let span = a.hi[c].max(b.hi[c]) - a.lo[c].min(b.lo[c]);
                gap.min(1.0 - span)
            }
            Geometry::Torus => 0.0,
        };
        d = d.max(gap.max(0.0));
    }
    d
}

// ---------------------------------------------------------------------------
// Built-in models
// ---------------------------------------------------------------------------

/// Two-branch linear horseshoe on the unit square.
///
/// Branch 0 maps `[0, 1/lu] x [0,1]` by `diag(lu, ls)` onto the bottom strip;
/// branch 1 maps `[1 - 1/lu, 1] x [0,1]` by `diag(-lu, -ls)` (the fold) onto
/// the top strip. The invariant set is the product of a `1/lu`-Cantor set in
/// `x` and an `ls`-Cantor set in `y`.
pub fn build_linear_horseshoe(lambda_u: f64, lambda_s: f64) -> Result<ModelSystem> {
    if !(lambda_u > 2.0 && lambda_u.is_finite()) {
        return Err(Error::ParameterOutOfRange(format!("lambda_u = {lambda_u} must exceed 2")));
    }
    if !(lambda_s > 0.0 && lambda_s < 0.5) {
        return Err(Error::ParameterOutOfRange(format!(
            "lambda_s = {lambda_s} must lie in (0, 1/2)"
        )));
    }
    let w = 1.0 / lambda_u;
    let branches = vec![
        AffineBranch {
            symbol: 0,
            domain: Rect::new(vec![0.0, 0.0], vec![w, 1.0]),
            linear: Matrix::diagonal(&[lambda_u, lambda_s]),
            offset: vec![0.0, 0.0],
        },
        AffineBranch {
            symbol: 1,
            domain: Rect::new(vec![1.0 - w, 0.0], vec![1.0, 1.0]),
            linear: Matrix::diagonal(&[-lambda_u, -lambda_s]),
            offset: vec![lambda_u, 1.0],
        },
    ];
    ModelSystem::new(
        format!("horseshoe:{lambda_u},{lambda_s}"),
        AmbientSpace::new(2, Geometry::Cube)?,
        ModelKind::Diffeomorphism,
        branches,
        1,
        TransitionMatrix::full(2),
    )
}

/// `z -> z^d` on the circle, i.e. `x -> d x mod 1`.
pub fn build_doubling_map(d: usize) -> Result<ModelSystem> {
    if d < 2 {
        return Err(Error::ParameterOutOfRange(format!("degree {d} must be at least 2")));
    }
    let df = d as f64;
    let branches = (0..d)
        .map(|k| AffineBranch {
            symbol: k,
            domain: Rect::new(vec![k as f64 / df], vec![(k + 1) as f64 / df]),
            linear: Matrix::diagonal(&[df]),
            offset: vec![-(k as f64)],
        })
        .collect();
    ModelSystem::new(
        format!("doubling:{d}"),
        AmbientSpace::new(1, Geometry::Torus)?,
        ModelKind::Expanding,
        branches,
        1,
        TransitionMatrix::full(d),
    )
}

/// `x -> slope * x - j` restricted to the kept intervals `[j/slope, (j+1)/slope]`.
pub fn build_cantor_repeller(slope: usize, kept: &[usize]) -> Result<ModelSystem> {
    if slope < 2 {
        return Err(Error::ParameterOutOfRange(format!("slope {slope} must be at least 2")));
    }
    let mut kept = kept.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.is_empty() || kept.iter().any(|&j| j >= slope) {
        return Err(Error::ParameterOutOfRange(format!(
            "kept branches must be a nonempty subset of 0..{slope}"
        )));
    }
    let s = slope as f64;
    let branches = kept
        .iter()
        .enumerate()
        .map(|(sym, &j)| AffineBranch {
            symbol: sym,
            domain: Rect::new(vec![j as f64 / s], vec![(j + 1) as f64 / s]),
            linear: Matrix::diagonal(&[s]),
            offset: vec![-(j as f64)],
        })
        .collect();
    let digits: String = kept.iter().map(|j| j.to_string()).collect();
    ModelSystem::new(
        format!("cantor:{slope},{digits}"),
        AmbientSpace::new(1, Geometry::Torus)?,
        ModelKind::Expanding,
        branches,
        1,
        TransitionMatrix::full(kept.len()),
    )
}

/// The toral automorphism `[[2,1],[1,1]]`.
///
/// Its symbolic coding is the edge shift of the matrix itself (the
/// transition structure of a Markov partition), so the coding has five
/// symbols, all acting by the same linear map on the whole torus.
pub fn build_cat_map() -> Result<ModelSystem> {
    let adjacency = [[2usize, 1], [1, 1]];
    let mut edges = Vec::new();
    for (from, row) in adjacency.iter().enumerate() {
        for (to, &mult) in row.iter().enumerate() {
            for _ in 0..mult {
                edges.push((from, to));
            }
        }
    }
    let rows: Vec<Vec<u8>> = edges
        .iter()
        .map(|&(_, to)| edges.iter().map(|&(from, _)| (to == from) as u8).collect())
        .collect();
    let linear = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 1.0]]).expect("2x2");
    let branches = (0..edges.len())
        .map(|sym| AffineBranch {
            symbol: sym,
            domain: Rect::unit(2),
            linear: linear.clone(),
            offset: vec![0.0, 0.0],
        })
        .collect();
    ModelSystem::new(
        "catmap",
        AmbientSpace::new(2, Geometry::Torus)?,
        ModelKind::Diffeomorphism,
        branches,
        1,
        TransitionMatrix::from_rows(&rows)?,
    )
}

/// The golden-mean beta map: `x -> g x` on `[0, 1/g]`, `x -> g x - 1` on
/// `[1/g, 1]`, with `g = (1 + sqrt 5)/2`. Its coding is the golden-mean shift
/// `[[1,1],[1,0]]`.
pub fn build_golden_mean_map() -> Result<ModelSystem> {
    let g = (1.0 + 5.0f64.sqrt()) / 2.0;
    let branches = vec![
        AffineBranch {
            symbol: 0,
            domain: Rect::new(vec![0.0], vec![1.0 / g]),
            linear: Matrix::diagonal(&[g]),
            offset: vec![0.0],
        },
        AffineBranch {
            symbol: 1,
            domain: Rect::new(vec![1.0 / g], vec![1.0]),
            linear: Matrix::diagonal(&[g]),
            offset: vec![-1.0],
        },
    ];
    ModelSystem::new(
        "golden",
        AmbientSpace::new(1, Geometry::Cube)?,
        ModelKind::Expanding,
        branches,
        1,
        TransitionMatrix::from_rows(&[vec![1, 1], vec![1, 0]])?,
    )
}

/// `t^u = log 2 / log lambda_u` for the linear horseshoe.
pub fn horseshoe_unstable_dimension(lambda_u: f64) -> f64 {
    2.0f64.ln() / lambda_u.ln()
}

/// `t^s = -log 2 / log lambda_s` for the linear horseshoe.
pub fn horseshoe_stable_dimension(lambda_s: f64) -> f64 {
    -(2.0f64.ln()) / lambda_s.ln()
}
