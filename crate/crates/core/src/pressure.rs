//! Geometric pressure estimators.
//!
//! `dist(., Lambda)` is realized through a cylinder cover: the union of the
//! depth-`m` forward cylinders (expanding models) or of the intersections of
//! depth-`m` forward cylinders with depth-`m` backward images
//! (diffeomorphisms). The cover contains `Lambda` and sits within one cylinder
//! diameter of it, so distances to the cover underestimate `dist(., Lambda)` by
//! at most that diameter; the depth is chosen so the diameter is below
//! `epsilon / 4` and is reported alongside every curve.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::fit::{least_squares, LineFit};
#[allow(unused_imports)]
use crate::math::Float;
use crate::models::{diagonal_image, CylinderGeometry, Geometry, ModelKind, ModelSystem, Potential, Rect};
use crate::symbolic::{check_word_cap, partition_sums, pressure_spectral};
use crate::{Error, Result, GRID_CELL_CAP};

// ---------------------------------------------------------------------------
// Cylinder cover
// ---------------------------------------------------------------------------

/// Tree of nested boxes stored flat: node `i` has box `lo/hi[i*n..(i+1)*n]`.
#[derive(Debug, Clone)]
struct RectTree {
    n: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Symbol fixed at the root of this node's branch (first symbol of a
    /// forward word, last symbol of a backward word).
    anchor: Vec<u32>,
    /// Children of node `i` are `child_index[child_start[i]..child_start[i+1]]`.
    child_start: Vec<u32>,
    child_index: Vec<u32>,
    roots: Vec<u32>,
    depth_of: Vec<u8>,
}

/// Affine map with diagonal linear part, `x -> scale * x + offset`.
#[derive(Clone)]
struct DiagMap {
    scale: Vec<f64>,
    offset: Vec<f64>,
}

impl DiagMap {
    fn of_branch(model: &ModelSystem, s: usize) -> Self {
        let b = &model.branches[s];
        let n = model.dim();
        Self { scale: (0..n).map(|c| b.linear[(c, c)]).collect(), offset: b.offset.clone() }
    }

    /// `other ∘ self`
    fn then(&self, other: &DiagMap) -> DiagMap {
        DiagMap {
            scale: self.scale.iter().zip(&other.scale).map(|(a, b)| a * b).collect(),
            offset: self.offset.iter().zip(&other.scale).zip(&other.offset).map(|((o, s), p)| s * o + p).collect(),
        }
    }

    fn preimage(&self, r: &Rect) -> Rect {
        let mut lo = Vec::with_capacity(r.dim());
        let mut hi = Vec::with_capacity(r.dim());
        for c in 0..r.dim() {
            let a = (r.lo[c] - self.offset[c]) / self.scale[c];
            let z = (r.hi[c] - self.offset[c]) / self.scale[c];
            lo.push(a.min(z));
            hi.push(a.max(z));
        }
        Rect::new(lo, hi)
    }

    fn image(&self, r: &Rect) -> Rect {
        let mut lo = Vec::with_capacity(r.dim());
        let mut hi = Vec::with_capacity(r.dim());
        for c in 0..r.dim() {
            let a = self.scale[c] * r.lo[c] + self.offset[c];
            let z = self.scale[c] * r.hi[c] + self.offset[c];
            lo.push(a.min(z));
            hi.push(a.max(z));
        }
        Rect::new(lo, hi)
    }
}

impl RectTree {
    fn new(n: usize) -> Self {
        Self {
            n,
            lo: Vec::new(),
            hi: Vec::new(),
            anchor: Vec::new(),
            child_start: Vec::new(),
            child_index: Vec::new(),
            roots: Vec::new(),
            depth_of: Vec::new(),
        }
    }

    /// Forward cylinders: appending symbol `a` after `last` intersects with
    /// the preimage of `D_a` under the composite map of the word so far.
    fn forward(model: &ModelSystem, depth: usize) -> Self {
        let mut tree = Self::new(model.dim());
        let mut children: Vec<Vec<u32>> = Vec::new();
        for s in 0..model.symbols() {
            let id = tree.push(&model.branches[s].domain, s, 1, &mut children);
            tree.roots.push(id);
            let map = DiagMap::of_branch(model, s);
            tree.grow_forward(model, id, s, &map, 1, depth, &mut children);
        }
        tree.finish(children);
        tree
    }

    #[allow(clippy::too_many_arguments)]
    fn grow_forward(
        &mut self,
        model: &ModelSystem,
        node: u32,
        last: usize,
        map: &DiagMap,
        level: usize,
        depth: usize,
        children: &mut Vec<Vec<u32>>,
    ) {
        if level == depth {
            return;
        }
        let rect = self.rect(node);
        let anchor = self.anchor[node as usize] as usize;
        for a in 0..model.symbols() {
            if !model.transition.get(last, a) {
                continue;
            }
            let child = rect.intersect(&map.preimage(&model.branches[a].domain));
            if child.is_empty() {
                continue;
            }
            let id = self.push(&child, anchor, level + 1, children);
            children[node as usize].push(id);
            let next = map.then(&DiagMap::of_branch(model, a));
            self.grow_forward(model, id, a, &next, level + 1, depth, children);
        }
    }

    /// Backward images: prepending symbol `a` before `first` intersects with
    /// the composite image of `f_a(D_a)`.
    fn backward(model: &ModelSystem, depth: usize) -> Self {
        let mut tree = Self::new(model.dim());
        let mut children: Vec<Vec<u32>> = Vec::new();
        for s in 0..model.symbols() {
            let rect = diagonal_image(&model.branches[s], &model.branches[s].domain);
            let id = tree.push(&rect, s, 1, &mut children);
            tree.roots.push(id);
            let map = DiagMap::of_branch(model, s);
            tree.grow_backward(model, id, s, &map, 1, depth, &mut children);
        }
        tree.finish(children);
        tree
    }

    #[allow(clippy::too_many_arguments)]
    fn grow_backward(
        &mut self,
        model: &ModelSystem,
        node: u32,
        first: usize,
        map: &DiagMap,
        level: usize,
        depth: usize,
        children: &mut Vec<Vec<u32>>,
    ) {
        if level == depth {
            return;
        }
        let rect = self.rect(node);
        let anchor = self.anchor[node as usize] as usize;
        for a in 0..model.symbols() {
            if !model.transition.get(a, first) {
                continue;
            }
            let b = &model.branches[a];
            let child = rect.intersect(&map.image(&diagonal_image(b, &b.domain)));
            if child.is_empty() {
                continue;
            }
            let id = self.push(&child, anchor, level + 1, children);
            children[node as usize].push(id);
            let next = DiagMap::of_branch(model, a).then(map);
            self.grow_backward(model, id, a, &next, level + 1, depth, children);
        }
    }

    fn push(&mut self, r: &Rect, anchor: usize, level: usize, children: &mut Vec<Vec<u32>>) -> u32 {
        let id = self.anchor.len() as u32;
        self.lo.extend_from_slice(&r.lo);
        self.hi.extend_from_slice(&r.hi);
        self.anchor.push(anchor as u32);
        self.depth_of.push(level as u8);
        children.push(Vec::new());
        id
    }

    fn finish(&mut self, children: Vec<Vec<u32>>) {
        self.child_start = Vec::with_capacity(children.len() + 1);
        self.child_start.push(0);
        for c in children {
            self.child_index.extend(c);
            self.child_start.push(self.child_index.len() as u32);
        }
    }

    fn rect(&self, i: u32) -> Rect {
        let i = i as usize * self.n;
        Rect::new(self.lo[i..i + self.n].to_vec(), self.hi[i..i + self.n].to_vec())
    }

    #[inline]
    fn children(&self, i: u32) -> &[u32] {
        let i = i as usize;
        &self.child_index[self.child_start[i] as usize..self.child_start[i + 1] as usize]
    }

    fn max_leaf_diameter(&self, depth: usize) -> f64 {
        (0..self.anchor.len())
            .filter(|&i| self.depth_of[i] as usize == depth)
            .map(|i| {
                (0..self.n)
                    .map(|c| self.hi[i * self.n + c] - self.lo[i * self.n + c])
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// Gap between the intervals `[a, b]` and `[lo, hi]`, wrapping on the torus.
#[inline]
fn gap_1d(a: f64, b: f64, lo: f64, hi: f64, torus: bool) -> f64 {
    #[inline]
    fn g(a: f64, b: f64, lo: f64, hi: f64) -> f64 {
        if b < lo {
            lo - b
        } else if a > hi {
            a - hi
        } else {
            0.0
        }
    }
    if lo > hi {
        return f64::INFINITY;
    }
    if !torus {
        return g(a, b, lo, hi);
    }
    if hi - lo >= 1.0 || b - a >= 1.0 {
        return 0.0;
    }
    g(a, b, lo, hi).min(g(a + 1.0, b + 1.0, lo, hi)).min(g(a - 1.0, b - 1.0, lo, hi))
}

#[derive(Debug, Clone)]
enum CoverShape {
    /// The cover is the whole ambient space.
    Full,
    Forward(RectTree),
    /// `compat[b * symbols + f]`: backward root `b` (time -1) may precede
    /// forward root `f` (time 0).
    TwoSided { forward: RectTree, backward: RectTree, compat: Vec<bool> },
}

/// Depth-`m` cylinder cover of the invariant set.
#[derive(Debug, Clone)]
pub struct CylinderCover {
    depth: usize,
    torus: bool,
    shape: CoverShape,
    diameter: f64,
    symbols: usize,
}

impl CylinderCover {
    pub fn new(model: &ModelSystem, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::ParameterOutOfRange("cover depth must be at least 1".into()));
        }
        let torus = model.space.geometry == Geometry::Torus;
        let geometry = model.cylinder_geometry()?;
        if geometry == CylinderGeometry::Full {
            return Ok(Self { depth, torus, shape: CoverShape::Full, diameter: 1.0, symbols: model.symbols() });
        }
        check_word_cap(model.symbols(), depth)?;
        let forward = RectTree::forward(model, depth);
        let (shape, diameter) = match model.kind {
            ModelKind::Expanding => {
                let d = forward.max_leaf_diameter(depth);
                (CoverShape::Forward(forward), d)
            }
            ModelKind::Diffeomorphism => {
                let backward = RectTree::backward(model, depth);
                // Leaves of the pair tree are intersections; bound their
                // diameter by the larger of the per-axis widths.
                let d = two_sided_diameter(&forward, &backward, depth);
                let k = model.symbols();
                let compat = (0..k * k).map(|i| model.transition.get(i / k, i % k)).collect();
                (CoverShape::TwoSided { forward, backward, compat }, d)
            }
        };
        Ok(Self { depth, torus, shape, diameter, symbols: model.symbols() })
    }

    /// Smallest depth whose cylinders have diameter below `epsilon / 4`.
    pub fn for_epsilon(model: &ModelSystem, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::ParameterOutOfRange(format!("epsilon = {epsilon} must be positive")));
        }
        if model.cylinder_geometry()? == CylinderGeometry::Full {
            return Self::new(model, 1);
        }
        let rate = cover_contraction(model)?;
        let target = epsilon / 4.0;
        // diameter(depth) <= rate^(depth - 1)
        let mut depth = 1usize;
        while rate.powi(depth as i32 - 1) >= target {
            depth += 1;
        }
        let mut cover = Self::new(model, depth)?;
        while cover.diameter >= target {
            cover = Self::new(model, cover.depth + 1)?;
        }
        Ok(cover)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Largest cylinder diameter at the cover depth (sup-norm).
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn symbols(&self) -> usize {
        self.symbols
    }

    /// Sup-norm distance from `y` to the cover.
    pub fn distance(&self, y: &[f64]) -> f64 {
        self.box_distance(y, y, None)
    }

    /// `distance(y) < epsilon`, with early exit.
    pub fn within(&self, y: &[f64], epsilon: f64) -> bool {
        self.box_distance(y, y, Some(epsilon)) < epsilon
    }

    /// Whether some point of the box `[lo, hi]` lies within `epsilon` of the
    /// cover.
    pub fn box_within(&self, lo: &[f64], hi: &[f64], epsilon: f64) -> bool {
        self.box_distance(lo, hi, Some(epsilon)) < epsilon
    }

    fn box_distance(&self, lo: &[f64], hi: &[f64], stop: Option<f64>) -> f64 {
        let q = Query { lo, hi, stop };
        let mut best = f64::INFINITY;
        match &self.shape {
            CoverShape::Full => return 0.0,
            CoverShape::Forward(tree) => {
                for &r in &tree.roots {
                    self.search_single(tree, r, &q, &mut best);
                    if q.done(best) {
                        break;
                    }
                }
            }
            CoverShape::TwoSided { forward, backward, compat } => {
                'outer: for &f in &forward.roots {
                    for &b in &backward.roots {
                        if self.pair_compatible(forward, backward, compat, f, b) {
                            self.search_pair(forward, backward, f, b, &q, &mut best);
                            if q.done(best) {
                                break 'outer;
                            }
                        }
                    }
                }
            }
        }
        best
    }

    #[inline]
    fn pair_compatible(&self, f: &RectTree, b: &RectTree, compat: &[bool], fr: u32, br: u32) -> bool {
        let fs = f.anchor[fr as usize] as usize;
        let bs = b.anchor[br as usize] as usize;
        compat[bs * self.symbols + fs]
    }

    fn node_gap(&self, tree: &RectTree, i: u32, q: &Query) -> f64 {
        let n = tree.n;
        let base = i as usize * n;
        let mut d = 0.0f64;
        for c in 0..n {
            d = d.max(gap_1d(q.lo[c], q.hi[c], tree.lo[base + c], tree.hi[base + c], self.torus));
        }
        d
    }

    fn pair_gap(&self, f: &RectTree, b: &RectTree, i: u32, j: u32, q: &Query) -> f64 {
        let n = f.n;
        let (bi, bj) = (i as usize * n, j as usize * n);
        let mut d = 0.0f64;
        for c in 0..n {
            let lo = f.lo[bi + c].max(b.lo[bj + c]);
            let hi = f.hi[bi + c].min(b.hi[bj + c]);
            d = d.max(gap_1d(q.lo[c], q.hi[c], lo, hi, self.torus));
            if d.is_infinite() {
                return d;
            }
        }
        d
    }

    fn search_single(&self, tree: &RectTree, node: u32, q: &Query, best: &mut f64) {
        let lb = self.node_gap(tree, node, q);
        if lb >= *best || q.stop.is_some_and(|e| lb >= e) {
            return;
        }
        if tree.depth_of[node as usize] as usize == self.depth {
            *best = lb;
            return;
        }
        for &c in tree.children(node) {
            self.search_single(tree, c, q, best);
            if q.done(*best) {
                return;
            }
        }
    }

    fn search_pair(&self, f: &RectTree, b: &RectTree, i: u32, j: u32, q: &Query, best: &mut f64) {
        let lb = self.pair_gap(f, b, i, j, q);
        if lb >= *best || q.stop.is_some_and(|e| lb >= e) {
            return;
        }
        if f.depth_of[i as usize] as usize == self.depth {
            *best = lb;
            return;
        }
        let (fk, bk) = (f.children(i), b.children(j));
        for &ci in fk {
            for &cj in bk {
                self.search_pair(f, b, ci, cj, q, best);
                if q.done(*best) {
                    return;
                }
            }
        }
    }
}

/// Query box with an optional early-exit threshold.
struct Query<'q> {
    lo: &'q [f64],
    hi: &'q [f64],
    stop: Option<f64>,
}

impl Query<'_> {
    #[inline]
    fn done(&self, best: f64) -> bool {
        self.stop.is_some_and(|e| best < e)
    }
}

fn two_sided_diameter(f: &RectTree, b: &RectTree, depth: usize) -> f64 {
    let n = f.n;
    let widths = |t: &RectTree| -> Vec<f64> {
        let mut w = vec![0.0f64; n];
        for i in 0..t.anchor.len() {
            if t.depth_of[i] as usize == depth {
                for (c, wc) in w.iter_mut().enumerate() {
                    *wc = wc.max(t.hi[i * n + c] - t.lo[i * n + c]);
                }
            }
        }
        w
    };
    let (wf, wb) = (widths(f), widths(b));
    wf.iter().zip(&wb).map(|(a, b)| a.min(*b)).fold(0.0, f64::max)
}

/// Per-step shrink factor of cylinder boxes: `1/|L_cc|` on expanded axes
/// (forward cylinders), `|L_cc|` on contracted axes (backward images).
fn cover_contraction(model: &ModelSystem) -> Result<f64> {
    let mut rate = 0.0f64;
    for b in &model.branches {
        for c in 0..model.dim() {
            let l = b.linear[(c, c)].abs();
            if l == 1.0 || l == 0.0 {
                return Err(Error::UnsupportedGeometry(format!(
                    "branch {} is neither expanding nor contracting along axis {c}",
                    b.symbol
                )));
            }
            rate = rate.max(if l > 1.0 { 1.0 / l } else { l });
        }
    }
    Ok(rate)
}

// ---------------------------------------------------------------------------
// Bowen balls and distances
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BowenBallSpec {
    pub center: Vec<f64>,
    pub epsilon: f64,
    pub k: usize,
}

/// Whether `y` stays within `epsilon` of the centre's orbit for `k` steps.
///
/// The centre's orbit must be defined for `k` steps. An orbit of `y` that
/// leaves every branch domain before step `k - 1` is outside the ball.
pub fn bowen_ball_contains(model: &ModelSystem, spec: &BowenBallSpec, y: &[f64]) -> Result<bool> {
    if spec.k == 0 || !(spec.epsilon > 0.0) {
        return Err(Error::ParameterOutOfRange("need k >= 1 and epsilon > 0".into()));
    }
    let n = model.dim();
    let mut x = spec.center.clone();
    model.space.wrap(&mut x);
    let mut z = y.to_vec();
    model.space.wrap(&mut z);
    let mut xn = vec![0.0; n];
    let mut zn = vec![0.0; n];
    let mut inside = true;
    for i in 0..spec.k {
        if inside && model.space.distance(&x, &z) >= spec.epsilon {
            inside = false;
        }
        if i + 1 == spec.k {
            break;
        }
        model.step(&x, &mut xn).ok_or(Error::NoBranch)?;
        core::mem::swap(&mut x, &mut xn);
        if inside {
            if model.step(&z, &mut zn).is_none() {
                inside = false;
            } else {
                core::mem::swap(&mut z, &mut zn);
            }
        }
    }
    Ok(inside)
}

/// Sup-norm distance from `y` to the depth-`m` cylinder cover of the
/// invariant set.
pub fn distance_to_repeller(model: &ModelSystem, y: &[f64], depth: usize) -> Result<f64> {
    let cover = CylinderCover::new(model, depth)?;
    let mut p = y.to_vec();
    model.space.wrap(&mut p);
    Ok(cover.distance(&p))
}

// ---------------------------------------------------------------------------
// Grid sweeps
// ---------------------------------------------------------------------------

/// Regular grid of `resolution^n` cells on the unit cube; cell centres are
/// the sample points (midpoint rule).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Grid {
    pub dim: usize,
    pub resolution: usize,
}

impl Grid {
    pub fn new(dim: usize, resolution: usize) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::ParameterOutOfRange("grid resolution must be positive".into()));
        }
        let cells = (resolution as f64).powi(dim as i32);
        if cells > GRID_CELL_CAP as f64 {
            return Err(Error::CapExceeded(format!(
                "{resolution}^{dim} grid cells exceeds the cap of {GRID_CELL_CAP}"
            )));
        }
        Ok(Self { dim, resolution })
    }

    pub fn cells(&self) -> usize {
        self.resolution.pow(self.dim as u32)
    }

    pub fn cell_edge(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_edge().powi(self.dim as i32)
    }

    /// Centre of cell `idx` (axis 0 varies fastest).
    pub fn center(&self, mut idx: usize, out: &mut [f64]) {
        let r = self.resolution;
        for o in out.iter_mut().take(self.dim) {
            *o = ((idx % r) as f64 + 0.5) / r as f64;
            idx /= r;
        }
    }

    fn neighbors(&self, idx: usize, wrap: bool, mut visit: impl FnMut(usize)) {
        let r = self.resolution;
        let mut stride = 1usize;
        for _ in 0..self.dim {
            let coord = (idx / stride) % r;
            if coord + 1 < r {
                visit(idx + stride);
            } else if wrap && r > 1 {
                visit(idx - coord * stride);
            }
            if coord > 0 {
                visit(idx - stride);
            } else if wrap && r > 1 {
                visit(idx + (r - 1) * stride);
            }
            stride *= r;
        }
    }
}

/// Per-cell orbit tracking against the cylinder cover: the survival of a
/// cell is the number of leading iterates `f^0 y, f^1 y, ...` (up to
/// `k_max`) that stay within `epsilon` of the invariant set.
#[derive(Debug, Clone)]
pub struct TrackingSweep<'a> {
    model: &'a ModelSystem,
    cover: CylinderCover,
    epsilon: f64,
    k_max: usize,
    grid: Grid,
}

impl<'a> TrackingSweep<'a> {
    pub fn new(model: &'a ModelSystem, epsilon: f64, k_max: usize, grid_resolution: usize) -> Result<Self> {
        if k_max == 0 || k_max > u8::MAX as usize {
            return Err(Error::ParameterOutOfRange(format!("k_max = {k_max} must lie in 1..=255")));
        }
        let grid = Grid::new(model.dim(), grid_resolution)?;
        let limit = epsilon / 4.0;
        if grid.cell_edge() > limit {
            return Err(Error::GridTooCoarse { cell: grid.cell_edge(), limit });
        }
        let cover = CylinderCover::for_epsilon(model, epsilon)?;
        Ok(Self { model, cover, epsilon, k_max, grid })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn cover(&self) -> &CylinderCover {
        &self.cover
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn survival_of_point(&self, y: &[f64]) -> u8 {
        let n = self.model.dim();
        let mut a = [0.0f64; 8];
        let mut b = [0.0f64; 8];
        let (cur, next) = if n <= 8 {
            (&mut a[..n], &mut b[..n])
        } else {
            unreachable!("grid sweeps support n <= 8")
        };
        cur.copy_from_slice(y);
        let mut steps = 0u8;
        loop {
            if !self.cover.within(cur, self.epsilon) {
                return steps;
            }
            steps += 1;
            if steps as usize == self.k_max {
                return steps;
            }
            if self.model.step(cur, next).is_none() {
                return steps;
            }
            cur.copy_from_slice(next);
        }
    }

    /// Survival of grid cell `idx`; pure, so cells may be processed in any
    /// order or in parallel.
    pub fn survival(&self, idx: usize) -> u8 {
        let mut y = [0.0f64; 8];
        let y = &mut y[..self.grid.dim];
        self.grid.center(idx, y);
        self.survival_of_point(y)
    }

    pub fn survival_map(&self) -> Vec<u8> {
        (0..self.grid.cells()).map(|i| self.survival(i)).collect()
    }

    /// Whether some point of grid cell `idx` keeps its first `k_max` iterates
    /// within `epsilon` of the invariant set. The cell box is pushed through
    /// the branch maps and pruned by its distance to the cover, so cylinders
    /// thinner than a cell are still found.
    pub fn cell_meets(&self, idx: usize) -> bool {
        let n = self.grid.dim;
        let h = self.grid.cell_edge();
        let mut c = [0.0f64; 8];
        self.grid.center(idx, &mut c[..n]);
        let lo: Vec<f64> = c[..n].iter().map(|x| x - 0.5 * h).collect();
        let hi: Vec<f64> = c[..n].iter().map(|x| x + 0.5 * h).collect();
        let r = Rect::new(lo, hi);
        if matches!(self.cover.shape, CoverShape::Full) {
            return self.model.branches.iter().any(|b| !r.intersect(&b.domain).is_empty());
        }
        self.box_survives(&r, self.k_max)
    }

    fn box_survives(&self, r: &Rect, steps: usize) -> bool {
        if !self.cover.box_within(&r.lo, &r.hi, self.epsilon) {
            return false;
        }
        if steps == 1 {
            return true;
        }
        self.model.branches.iter().any(|b| {
            let piece = r.intersect(&b.domain);
            !piece.is_empty() && self.box_survives(&diagonal_image(b, &piece), steps - 1)
        })
    }

    pub fn membership_map(&self) -> Vec<bool> {
        (0..self.grid.cells()).map(|i| self.cell_meets(i)).collect()
    }

    /// Volume of `B(Lambda, epsilon, k)` for every `k` in `1..=k_max`, with
    /// the boundary-cell uncertainty band.
    pub fn curve(&self, survival: &[u8]) -> VolumeCurve {
        assert_eq!(survival.len(), self.grid.cells());
        let wrap = self.model.space.geometry == Geometry::Torus;
        let mut counts = vec![0u64; self.k_max + 1];
        for &s in survival {
            counts[s as usize] += 1;
        }
        let mut points = Vec::with_capacity(self.k_max);
        let cv = self.grid.cell_volume();
        for k in 1..=self.k_max {
            let inside: u64 = counts[k..].iter().sum();
            let mut boundary = 0u64;
            for (idx, &s) in survival.iter().enumerate() {
                let here = s as usize >= k;
                let mut differs = false;
                self.grid.neighbors(idx, wrap, |j| differs |= (survival[j] as usize >= k) != here);
                if differs {
                    boundary += 1;
                }
            }
            points.push(VolumePoint { k, volume: inside as f64 * cv, band: boundary as f64 * cv });
        }
        VolumeCurve {
            epsilon: self.epsilon,
            grid_resolution: self.grid.resolution,
            cover_depth: self.cover.depth,
            cover_diameter: self.cover.diameter,
            points,
        }
    }

    /// Centres of the cells flagged in `members`, in grid order.
    pub fn cloud(&self, members: &[bool]) -> PointCloud {
        let n = self.grid.dim;
        let mut coords = Vec::new();
        let mut y = vec![0.0; n];
        for (idx, _) in members.iter().enumerate().filter(|(_, &m)| m) {
            self.grid.center(idx, &mut y);
            coords.extend_from_slice(&y);
        }
        PointCloud { dim: n, coords }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VolumePoint {
    pub k: usize,
    pub volume: f64,
    /// Total volume of cells on the membership boundary.
    pub band: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VolumeCurve {
    pub epsilon: f64,
    pub grid_resolution: usize,
    pub cover_depth: usize,
    pub cover_diameter: f64,
    pub points: Vec<VolumePoint>,
}

impl VolumeCurve {
    pub fn volume(&self, k: usize) -> Option<f64> {
        self.points.iter().find(|p| p.k == k).map(|p| p.volume)
    }
}

/// Flat point storage, `dim` coordinates per point.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointCloud {
    pub dim: usize,
    pub coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize) -> Self {
        Self { dim, coords: Vec::new() }
    }

    pub fn push(&mut self, p: &[f64]) {
        debug_assert_eq!(p.len(), self.dim);
        self.coords.extend_from_slice(p);
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.coords.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks(self.dim.max(1))
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.iter().any(|q| q == p)
    }
}

/// Volume of `B(Lambda, epsilon, k)` on a `grid_resolution^n` grid.
pub fn neighborhood_volume(model: &ModelSystem, epsilon: f64, k: usize, grid_resolution: usize) -> Result<f64> {
    let sweep = TrackingSweep::new(model, epsilon, k, grid_resolution)?;
    let inside = (0..sweep.grid.cells()).filter(|&i| sweep.survival(i) as usize >= k).count();
    Ok(inside as f64 * sweep.grid.cell_volume())
}

/// Volume curve for `k = 1..=k_max`.
pub fn volume_curve(model: &ModelSystem, epsilon: f64, k_max: usize, grid_resolution: usize) -> Result<VolumeCurve> {
    let sweep = TrackingSweep::new(model, epsilon, k_max, grid_resolution)?;
    Ok(sweep.curve(&sweep.survival_map()))
}

/// Grid cells meeting the truncated local stable set: orbits staying within
/// `epsilon` of the invariant set for `depth` iterates.
pub fn sample_local_stable_set(
    model: &ModelSystem,
    epsilon: f64,
    depth: usize,
    grid_resolution: usize,
) -> Result<PointCloud> {
    if model.kind != ModelKind::Diffeomorphism {
        return Err(Error::ParameterOutOfRange("local stable sets need a diffeomorphism".into()));
    }
    let sweep = TrackingSweep::new(model, epsilon, depth, grid_resolution)?;
    Ok(sweep.cloud(&sweep.membership_map()))
}

/// Half the smallest gap between branch domains, or `0.1` when the domains
/// touch (repellers filling the space).
pub fn default_epsilon(model: &ModelSystem) -> f64 {
    let gap = model.min_branch_gap();
    if gap > 0.0 {
        0.5 * gap
    } else {
        0.1
    }
}

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PressureMethod {
    Spectral,
    PartitionSum,
    VolumeGrowth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KWindow {
    pub lo: usize,
    pub hi: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurveSample {
    pub k: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PressureEstimate {
    pub value: f64,
    pub method: PressureMethod,
    /// Requested k range.
    pub window: KWindow,
    /// Range actually used by the line fit.
    pub fit_window: KWindow,
    /// RMS residual of the log-linear fit (0 for the spectral oracle).
    pub residual: f64,
    pub fit: Option<LineFit>,
    /// Raw per-k quantity: `Z_k` or `vol(B(Lambda, epsilon, k))`.
    pub raw: Vec<CurveSample>,
}

impl PressureEstimate {
    pub fn spectral(value: f64) -> Self {
        Self {
            value,
            method: PressureMethod::Spectral,
            window: KWindow { lo: 0, hi: 0 },
            fit_window: KWindow { lo: 0, hi: 0 },
            residual: 0.0,
            fit: None,
            raw: Vec::new(),
        }
    }
}

/// Upper half of a window, keeping at least four points.
fn upper_half(samples: &[CurveSample]) -> &[CurveSample] {
    let keep = samples.len().div_ceil(2).max(4).min(samples.len());
    &samples[samples.len() - keep..]
}

pub fn pressure_from_volume_growth(curve: &VolumeCurve, window: KWindow) -> Result<PressureEstimate> {
    let pts: Vec<&VolumePoint> = curve.points.iter().filter(|p| p.k >= window.lo && p.k <= window.hi).collect();
    if pts.len() < 4 {
        return Err(Error::DegenerateCurve(format!(
            "{} points in window {}..{}; need at least 4",
            pts.len(),
            window.lo,
            window.hi
        )));
    }
    if let Some(p) = pts.iter().find(|p| !(p.volume > 0.0)) {
        return Err(Error::DegenerateCurve(format!(
            "volume vanishes at k = {}; pressure bound is -infinity at this resolution",
            p.k
        )));
    }
    let raw: Vec<CurveSample> = pts.iter().map(|p| CurveSample { k: p.k, value: p.volume }).collect();
    let used = upper_half(&raw);
    let xs: Vec<f64> = used.iter().map(|s| s.k as f64).collect();
    let ys: Vec<f64> = used.iter().map(|s| s.value.ln()).collect();
    let fit = least_squares(&xs, &ys).expect("at least four distinct k");
    Ok(PressureEstimate {
        value: fit.slope,
        method: PressureMethod::VolumeGrowth,
        window,
        fit_window: KWindow { lo: used[0].k, hi: used[used.len() - 1].k },
        residual: fit.residual,
        fit: Some(fit),
        raw,
    })
}

/// Pressure from `Z_1..Z_{k_max}`.
///
/// The log-linear slope over the upper half of the range is always fitted.
/// For locally constant potentials `Z_k` is a finite sum of exponentials
/// `sum c_i mu_i^k`, so it obeys a linear recurrence of order at most the
/// symbol count; when the data determine such a recurrence exactly, its
/// dominant root gives the growth rate without the `O(1/k)` bias of the
/// slope. Otherwise the slope is reported.
pub fn pressure_from_partition_sums(
    model: &ModelSystem,
    potential: &Potential,
    k_max: usize,
    delta: f64,
) -> Result<PressureEstimate> {
    if k_max < 6 {
        return Err(Error::ParameterOutOfRange(format!("k_max = {k_max} must be at least 6")));
    }
    let z = partition_sums(model, potential, k_max, delta)?;
    let raw: Vec<CurveSample> = z.iter().enumerate().map(|(i, &v)| CurveSample { k: i + 1, value: v }).collect();
    let lo = k_max / 2 + 1;
    let used = &raw[lo - 1..];
    let xs: Vec<f64> = used.iter().map(|s| s.k as f64).collect();
    let ys: Vec<f64> = used.iter().map(|s| s.value.ln()).collect();
    let fit = least_squares(&xs, &ys).expect("at least three distinct k");
    let values: Vec<f64> = used.iter().map(|s| s.value).collect();
    let value = recurrence_growth(&values, model.symbols(), fit.slope.exp())
        .map(|mu| mu.ln())
        .unwrap_or(fit.slope);
    Ok(PressureEstimate {
        value,
        method: PressureMethod::PartitionSum,
        window: KWindow { lo: 1, hi: k_max },
        fit_window: KWindow { lo, hi: k_max },
        residual: fit.residual,
        fit: Some(fit),
        raw,
    })
}

/// Dominant root of the lowest-order linear recurrence that reproduces `z`
/// to relative accuracy `1e-10`, with at least one spare equation as a check.
pub(crate) fn recurrence_growth(z: &[f64], max_order: usize, guess: f64) -> Option<f64> {
    let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return None;
    }
    for r in 1..=max_order {
        let eqs = z.len().checked_sub(r)?;
        if eqs < r + 1 {
            return None;
        }
        // rows: [z_{t+r-1}, ..., z_t] . c = z_{t+r}
        let a: Vec<Vec<f64>> = (0..eqs).map(|t| (0..r).map(|i| z[t + r - 1 - i]).collect()).collect();
        let b: Vec<f64> = (0..eqs).map(|t| z[t + r]).collect();
        let Some(c) = least_squares_qr(&a, &b) else { continue };
        let resid: f64 = a
            .iter()
            .zip(&b)
            .map(|(row, &rhs)| {
                let e = row.iter().zip(&c).map(|(x, y)| x * y).sum::<f64>() - rhs;
                e * e
            })
            .sum::<f64>()
            .sqrt();
        if resid <= 1e-10 * norm {
            return dominant_root(&c, guess);
        }
    }
    None
}

/// Householder least squares for a tall system.
fn least_squares_qr(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let m = a.len();
    let n = a.first()?.len();
    let mut q: Vec<Vec<f64>> = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let norm = (col..m).map(|i| q[i][col] * q[i][col]).sum::<f64>().sqrt();
        if norm == 0.0 {
            return None;
        }
        let alpha = if q[col][col] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (col..m).map(|i| q[i][col]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in col..n {
            let dot: f64 = (col..m).map(|i| v[i - col] * q[i][j]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in col..m {
                q[i][j] -= f * v[i - col];
            }
        }
        let dot: f64 = (col..m).map(|i| v[i - col] * rhs[i]).sum();
        let f = 2.0 * dot / vnorm2;
        for i in col..m {
            rhs[i] -= f * v[i - col];
        }
    }
    let scale = (0..n).map(|i| q[i][i].abs()).fold(0.0, f64::max);
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        if q[i][i].abs() <= 1e-13 * scale {
            return None;
        }
        let s: f64 = (i + 1..n).map(|j| q[i][j] * x[j]).sum();
        x[i] = (rhs[i] - s) / q[i][i];
    }
    Some(x)
}

/// Largest positive root of `x^r - c_1 x^{r-1} - ... - c_r`.
fn dominant_root(c: &[f64], guess: f64) -> Option<f64> {
    match c.len() {
        1 => (c[0] > 0.0).then_some(c[0]),
        2 => {
            let disc = c[0] * c[0] + 4.0 * c[1];
            if disc < 0.0 {
                return None;
            }
            let root = 0.5 * (c[0] + disc.sqrt());
            (root > 0.0).then_some(root)
        }
        _ => {
            let mut x = guess;
            for _ in 0..100 {
                let (mut p, mut dp) = (1.0f64, 0.0f64);
                for &ci in c {
                    dp = dp * x + p;
                    p = p * x - ci;
                }
                if dp == 0.0 {
                    return None;
                }
                let step = p / dp;
                x -= step;
                if step.abs() <= 1e-16 * x.abs() {
                    break;
                }
            }
            (x > 0.0 && x.is_finite()).then_some(x)
        }
    }
}

/// Spectral pressure wrapped as an estimate.
pub fn pressure_from_spectrum(model: &ModelSystem, potential: &Potential) -> Result<PressureEstimate> {
    Ok(PressureEstimate::spectral(pressure_spectral(model, potential)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{
        build_cantor_repeller, build_cat_map, build_doubling_map, build_golden_mean_map, build_linear_horseshoe,
        PotentialLabel,
    };
    use crate::symbolic::default_delta;

    #[test]
    fn bowen_ball_examples() {
        let d = build_doubling_map(2).unwrap();
        let ball = |k| BowenBallSpec { center: vec![0.0], epsilon: 0.1, k };
        assert!(bowen_ball_contains(&d, &ball(1), &[0.05]).unwrap());
        assert!(!bowen_ball_contains(&d, &ball(4), &[0.05]).unwrap());
        for k in 1..10 {
            assert!(bowen_ball_contains(&d, &ball(k), &[0.0]).unwrap());
        }

        let h = build_linear_horseshoe(3.0, 0.25).unwrap();
        let spec = |k| BowenBallSpec { center: vec![0.0, 0.0], epsilon: 0.05, k };
        for k in 1..12 {
            assert!(bowen_ball_contains(&h, &spec(k), &[0.0, 0.04]).unwrap());
        }
    }

    #[test]
    fn bowen_ball_escape_is_outside() {
        let h = build_linear_horseshoe(3.0, 0.25).unwrap();
        // Centre of the gap, but within epsilon = 0.2 of the fixed point's
        // neighbour at step 0 only.
        let spec = BowenBallSpec { center: vec![1.0 / 3.0, 0.0], epsilon: 0.2, k: 2 };
        assert!(!bowen_ball_contains(&h, &spec, &[0.4, 0.0]).unwrap());
        let bad = BowenBallSpec { center: vec![0.5, 0.5], epsilon: 0.1, k: 3 };
        assert_eq!(bowen_ball_contains(&h, &bad, &[0.5, 0.5]), Err(Error::NoBranch));
    }

    #[test]
    fn distance_examples() {
        let h = build_linear_horseshoe(3.0, 0.25).unwrap();
        for m in 1..8 {
            assert_eq!(distance_to_repeller(&h, &[0.0, 0.0], m).unwrap(), 0.0);
        }
        let c = build_cantor_repeller(3, &[0, 2]).unwrap();
        for m in 1..10 {
            assert_eq!(distance_to_repeller(&c, &[0.0], m).unwrap(), 0.0);
        }
        let m = 12;
        let d = distance_to_repeller(&c, &[0.5], m).unwrap();
        assert!((d - 1.0 / 6.0).abs() <= 3.0f64.powi(-(m as i32)));
        let dbl = build_doubling_map(2).unwrap();
        for y in [0.0, 0.13, 0.5, 0.999] {
            assert_eq!(distance_to_repeller(&dbl, &[y], 6).unwrap(), 0.0);
        }
        let cat = build_cat_map().unwrap();
        assert_eq!(distance_to_repeller(&cat, &[0.3, 0.7], 3).unwrap(), 0.0);
    }

    #[test]
    fn cover_distance_matches_brute_force() {
        // Oracle: scan every two-sided word pair of the horseshoe.
        let h = build_linear_horseshoe(3.0, 0.25).unwrap();
        let depth = 4;
        let cover = CylinderCover::new(&h, depth).unwrap();
        let fwd = crate::symbolic::cylinders(&h, depth).unwrap();
        let words = h.transition.admissible_words(depth).unwrap();
        let mut back = Vec::new();
        for w in &words {
            let mut r = diagonal_image(&h.branches[w[0]], &h.branches[w[0]].domain);
            for &s in &w[1..] {
                let b = &h.branches[s];
                r = diagonal_image(b, &r.intersect(&b.domain));
            }
            back.push(r);
        }
        for &y in &[[0.5, 0.5], [0.2, 0.3], [0.95, 0.1], [0.11, 0.62], [0.7, 0.99]] {
            let brute = fwd
                .iter()
                .flat_map(|f| back.iter().map(move |b| f.rect.intersect(b)))
                .filter(|r| !r.is_empty())
                .map(|r| r.distance_to(&y, Geometry::Cube))
                .fold(f64::INFINITY, f64::min);
            assert!((cover.distance(&y) - brute).abs() < 1e-15, "{y:?}");
            assert_eq!(cover.within(&y, brute + 1e-9), true);
            assert_eq!(cover.within(&y, brute), false);
        }
    }

    #[test]
    fn cover_depth_meets_epsilon() {
        let c = build_cantor_repeller(3, &[0, 2]).unwrap();
        let cover = CylinderCover::for_epsilon(&c, 0.05).unwrap();
        assert!(cover.diameter() < 0.0125);
        assert_eq!(cover.depth(), 5);
        let h = build_linear_horseshoe(3.0, 0.25).unwrap();
        let cover = CylinderCover::for_epsilon(&h, 0.05).unwrap();
        assert!(cover.diameter() < 0.0125);
    }

    #[test]
    fn neighborhood_volume_examples() {
        let d = build_doubling_map(2).unwrap();
        for k in [1, 3, 6] {
            assert_eq!(neighborhood_volume(&d, 0.1, k, 64).unwrap(), 1.0);
        }
        let c = build_cantor_repeller(3, &[0, 2]).unwrap();
        let v1 = neighborhood_volume(&c, 0.05, 1, 1024).unwrap();
        let v2 = neighborhood_volume(&c, 0.05, 2, 1024).unwrap();
        assert!(v1 >= v2);
        assert!(matches!(neighborhood_volume(&c, 0.05, 2, 16), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn volume_growth_fits() {
        let flat = VolumeCurve {
            epsilon: 0.1,
            grid_resolution: 1,
            cover_depth: 1,
            cover_diameter: 0.0,
            points: (1..=8).map(|k| VolumePoint { k, volume: 1.0, band: 0.0 }).collect(),
        };
        let e = pressure_from_volume_growth(&flat, KWindow { lo: 1, hi: 8 }).unwrap();
        assert!(e.value.abs() < 1e-15);

        let geometric = VolumeCurve {
            points: (1..=10).map(|k| VolumePoint { k, volume: (2.0f64 / 3.0).powi(k as i32), band: 0.0 }).collect(),
            ..flat.clone()
        };
        let e = pressure_from_volume_growth(&geometric, KWindow { lo: 4, hi: 10 }).unwrap();
        assert!((e.value - (2.0f64 / 3.0).ln()).abs() < 1e-12);
        assert_eq!(e.fit_window, KWindow { lo: 7, hi: 10 });

        let mut holes = geometric.clone();
        holes.points[8].volume = 0.0;
        assert!(matches!(
            pressure_from_volume_growth(&holes, KWindow { lo: 4, hi: 10 }),
            Err(Error::DegenerateCurve(_))
        ));
        assert!(pressure_from_volume_growth(&geometric, KWindow { lo: 8, hi: 10 }).is_err());
    }

    #[test]
    fn partition_estimator_examples() {
        let h = build_linear_horseshoe(3.0, 0.25).unwrap();
        let pu = h.potential(PotentialLabel::PhiU).unwrap();
        let e = pressure_from_partition_sums(&h, &pu, 12, default_delta(&h)).unwrap();
        assert!((e.value - (2.0f64 / 3.0).ln()).abs() < 1e-9);

        let d = build_doubling_map(2).unwrap();
        let e = pressure_from_partition_sums(&d, &Potential::zero(2), 12, default_delta(&d)).unwrap();
        assert!((e.value - 2.0f64.ln()).abs() < 1e-9);

        let g = build_golden_mean_map().unwrap();
        let e = pressure_from_partition_sums(&g, &Potential::zero(2), 12, default_delta(&g)).unwrap();
        let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
        assert!((e.value - golden.ln()).abs() < 1e-9);
        // The plain slope carries the Fibonacci transient.
        assert!((e.fit.unwrap().slope - golden.ln()).abs() > 1e-9);

        assert!(pressure_from_partition_sums(&g, &Potential::zero(2), 5, 0.1).is_err());
    }

    #[test]
    fn recurrence_of_three_exponentials() {
        let z: Vec<f64> = (0..12)
            .map(|k| 2.0 * 1.7f64.powi(k) + 0.5 * 0.9f64.powi(k) - 0.3 * (-0.4f64).powi(k))
            .collect();
        let mu = recurrence_growth(&z, 3, 1.6).unwrap();
        assert!((mu - 1.7).abs() < 1e-10);
    }

    #[test]
    fn stable_set_cloud_nesting() {
        let h = build_linear_horseshoe(3.0, 0.25).unwrap();
        let a = sample_local_stable_set(&h, 0.05, 3, 128).unwrap();
        let b = sample_local_stable_set(&h, 0.05, 4, 128).unwrap();
        assert!(!b.is_empty());
        assert!(b.len() <= a.len());
        assert!(b.iter().all(|p| a.contains(p)));
        let d = build_doubling_map(2).unwrap();
        assert!(sample_local_stable_set(&d, 0.1, 3, 64).is_err());
    }
}
