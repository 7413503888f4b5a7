//! Expansion rate, box counting, Minkowski content and the dimension bound
//! `n + P/s` with its attractor/SRB equivalence checks.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::fit::least_squares;
use crate::linalg::Matrix;
#[allow(unused_imports)]
use crate::math::Float;
use crate::models::{build_linear_horseshoe, CylinderGeometry, ModelKind, ModelSystem, Potential, PotentialLabel};
use crate::pressure::{PointCloud, PressureEstimate};
use crate::symbolic::{check_word_cap, equilibrium_measure, markov_measure_stats, pressure_spectral, MarkovMeasureStats};
use crate::{Error, Result, EXACT_TOLERANCE, GRID_CELL_CAP};

// ---------------------------------------------------------------------------
// Expansion rate
// ---------------------------------------------------------------------------

/// `s = lim (1/k) log max ||Df^k||` over the invariant set.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExpansionRate {
    /// `min_k a_k / k`, an upper bound that converges to the limit.
    pub value: f64,
    /// `a_k = log max ||Df^k||` for `k = 1..=k_max`.
    pub log_norms: Vec<f64>,
    /// `a_k / k`.
    pub per_k: Vec<f64>,
    pub k_max: usize,
    /// Branch products collapsed to powers of a single normal matrix.
    pub collapsed: bool,
}

impl ExpansionRate {
    fn from_log_norms(log_norms: Vec<f64>, collapsed: bool) -> Result<Self> {
        let per_k: Vec<f64> = log_norms.iter().enumerate().map(|(i, a)| a / (i + 1) as f64).collect();
        let value = per_k.iter().copied().fold(f64::INFINITY, f64::min);
        if !(value > 0.0) {
            return Err(Error::NonPositiveRate(value));
        }
        Ok(Self { value, k_max: log_norms.len(), log_norms, per_k, collapsed })
    }
}

/// When every branch matrix is `+-A` for one normal `A`, products are `+-A^k`
/// and `||A^k|| = ||A||^k`.
fn common_normal_matrix(mats: &[&Matrix]) -> Option<Matrix> {
    let first = mats.first()?;
    let neg = first.scale(-1.0);
    let same = mats.iter().all(|m| m.max_abs_diff(first) == 0.0 || m.max_abs_diff(&neg) == 0.0);
    (same && first.is_normal(1e-12)).then(|| (*first).clone())
}

pub fn expansion_rate(model: &ModelSystem, k_max: usize) -> Result<ExpansionRate> {
    if k_max == 0 {
        return Err(Error::ParameterOutOfRange("k_max must be at least 1".into()));
    }
    let mats: Vec<&Matrix> = model.branches.iter().map(|b| &b.linear).collect();
    if let Some(a) = common_normal_matrix(&mats) {
        let a1 = a.operator_norm().ln();
        return ExpansionRate::from_log_norms((1..=k_max).map(|k| k as f64 * a1).collect(), true);
    }
    expansion_rate_exhaustive(model, k_max)
}

/// Maximum over all admissible words of the product norm, no shortcuts.
pub fn expansion_rate_exhaustive(model: &ModelSystem, k_max: usize) -> Result<ExpansionRate> {
    let mats: Vec<Matrix> = model.branches.iter().map(|b| b.linear.clone()).collect();
    word_product_rates(model, &mats, k_max)
}

/// Expansion rate of `f^{-1}`: products of inverse branch matrices along
/// reversed words.
pub fn expansion_rate_inverse(model: &ModelSystem, k_max: usize) -> Result<ExpansionRate> {
    let inv: Vec<Matrix> = model
        .branches
        .iter()
        .map(|b| b.linear.inverse().ok_or_else(|| Error::InvalidModel("singular branch".into())))
        .collect::<Result<_>>()?;
    let refs: Vec<&Matrix> = inv.iter().collect();
    if let Some(a) = common_normal_matrix(&refs) {
        let a1 = a.operator_norm().ln();
        return ExpansionRate::from_log_norms((1..=k_max).map(|k| k as f64 * a1).collect(), true);
    }
    word_product_rates(model, &inv, k_max)
}

fn word_product_rates(model: &ModelSystem, mats: &[Matrix], k_max: usize) -> Result<ExpansionRate> {
    if k_max == 0 {
        return Err(Error::ParameterOutOfRange("k_max must be at least 1".into()));
    }
    check_word_cap(model.symbols(), k_max)?;
    let mut best = vec![f64::NEG_INFINITY; k_max];
    let n = model.dim();
    for s in 0..model.symbols() {
        walk_products(model, mats, s, &mats[s], 1, k_max, &mut best);
    }
    let _ = n;
    ExpansionRate::from_log_norms(best, false)
}

/// Depth-first walk: `prod` is `L_{w_{k-1}} ... L_{w_0}` for the current word.
fn walk_products(
    model: &ModelSystem,
    mats: &[Matrix],
    last: usize,
    prod: &Matrix,
    k: usize,
    k_max: usize,
    best: &mut [f64],
) {
    let a = prod.operator_norm().ln();
    if a > best[k - 1] {
        best[k - 1] = a;
    }
    if k == k_max {
        return;
    }
    for s in 0..model.symbols() {
        if model.transition.get(last, s) {
            let next = mats[s].mul(prod);
            walk_products(model, mats, s, &next, k + 1, k_max, best);
        }
    }
}

// ---------------------------------------------------------------------------
// Box counting
// ---------------------------------------------------------------------------

/// Number of cells `[i*scale, (i+1)*scale)` (anchored at 0) containing a
/// point of the cloud. Points on the far face `x = 1` fall in the last cell.
pub fn box_count(cloud: &PointCloud, scale: f64) -> u64 {
    assert!(scale > 0.0 && scale <= 1.0, "scale must lie in (0, 1]");
    let per_axis = (1.0 / scale).ceil() as u128;
    let mut keys: Vec<u128> = cloud
        .iter()
        .map(|p| {
            p.iter().rev().fold(0u128, |acc, &x| {
                let i = ((x / scale).floor().max(0.0) as u128).min(per_axis - 1);
                acc * per_axis + i
            })
        })
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len() as u64
}

/// `base^-lo, ..., base^-hi`.
pub fn geometric_scales(base: f64, lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|j| base.powi(-j)).collect()
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DimensionEstimate {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    /// All scales supplied, coarsest first.
    pub scales: Vec<f64>,
    pub counts: Vec<u64>,
    /// Number of coarse scales left out of the fit.
    pub excluded: usize,
}

/// Coarse scales always dropped from dimension fits.
pub const EXCLUDED_COARSE_SCALES: usize = 2;

/// Least-squares slope of `log N` against `log(1/scale)`, leaving out the two
/// coarsest scales. Needs four fitted scales and two decades of range.
pub fn box_dimension(samples: &[(f64, u64)]) -> Result<DimensionEstimate> {
    let mut s: Vec<(f64, u64)> = samples.to_vec();
    s.sort_by(|a, b| b.0.total_cmp(&a.0));
    if s.len() < EXCLUDED_COARSE_SCALES + 4 {
        return Err(Error::DegenerateScales(format!(
            "{} scales given; need {} (two coarsest are excluded from the fit)",
            s.len(),
            EXCLUDED_COARSE_SCALES + 4
        )));
    }
    if s.iter().any(|&(sc, c)| !(sc > 0.0 && sc <= 1.0) || c == 0) {
        return Err(Error::DegenerateScales("scales must lie in (0,1] with positive counts".into()));
    }
    let decades = (s[0].0 / s[s.len() - 1].0).log10_();
    if decades < 2.0 {
        return Err(Error::DegenerateScales(format!("scales span {decades:.2} decades; need 2")));
    }
    let used = &s[EXCLUDED_COARSE_SCALES..];
    let xs: Vec<f64> = used.iter().map(|(sc, _)| -sc.ln()).collect();
    let ys: Vec<f64> = used.iter().map(|(_, c)| (*c as f64).ln()).collect();
    let fit = least_squares(&xs, &ys).ok_or_else(|| Error::DegenerateScales("repeated scales".into()))?;
    Ok(DimensionEstimate {
        slope: fit.slope,
        intercept: fit.intercept,
        residual: fit.residual,
        scales: s.iter().map(|p| p.0).collect(),
        counts: s.iter().map(|p| p.1).collect(),
        excluded: EXCLUDED_COARSE_SCALES,
    })
}

trait Log10 {
    fn log10_(self) -> f64;
}

impl Log10 for f64 {
    fn log10_(self) -> f64 {
        libm::log10(self)
    }
}

/// Counts then fit.
pub fn cloud_dimension(cloud: &PointCloud, scales: &[f64]) -> Result<DimensionEstimate> {
    let samples: Vec<(f64, u64)> = scales.iter().map(|&s| (s, box_count(cloud, s))).collect();
    box_dimension(&samples)
}

/// Centres of the depth-`depth` cylinder cover of the invariant set: forward
/// cylinders for expanding maps, forward-by-backward boxes for
/// diffeomorphisms, and a `2^depth` grid when the set is the whole torus.
pub fn invariant_set_points(model: &ModelSystem, depth: usize) -> Result<PointCloud> {
    let n = model.dim();
    let mut cloud = PointCloud::new(n);
    if model.cylinder_geometry()? == CylinderGeometry::Full {
        let res = 1usize << depth.min(24);
        let grid = crate::pressure::Grid::new(n, res)?;
        let mut y = vec![0.0; n];
        for i in 0..grid.cells() {
            grid.center(i, &mut y);
            cloud.push(&y);
        }
        return Ok(cloud);
    }
    let forward = crate::symbolic::cylinders(model, depth)?;
    match model.kind {
        ModelKind::Expanding => {
            for c in forward {
                cloud.push(&c.rect.center());
            }
        }
        ModelKind::Diffeomorphism => {
            check_word_cap(model.symbols(), 2 * depth)?;
            let backward = backward_boxes(model, depth)?;
            for f in &forward {
                for (last, b) in &backward {
                    if model.transition.get(*last, f.word[0]) {
                        let r = f.rect.intersect(b);
                        if !r.is_empty() {
                            cloud.push(&r.center());
                        }
                    }
                }
            }
        }
    }
    Ok(cloud)
}

/// `(last symbol, box)` for every admissible backward word of length `depth`.
fn backward_boxes(model: &ModelSystem, depth: usize) -> Result<Vec<(usize, crate::models::Rect)>> {
    use crate::models::diagonal_image;
    let words = model.transition.admissible_words(depth)?;
    let mut out = Vec::with_capacity(words.len());
    for w in words {
        let b0 = &model.branches[w[0]];
        let mut r = diagonal_image(b0, &b0.domain);
        for &s in &w[1..] {
            let b = &model.branches[s];
            r = diagonal_image(b, &r.intersect(&b.domain));
        }
        if !r.is_empty() {
            out.push((w[depth - 1], r));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Minkowski content
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MinkowskiSample {
    pub rho: f64,
    pub volume: f64,
    /// `vol(A_rho) / (2 rho)^(n - t)`
    pub ratio: f64,
}

/// `rho_k = r_k / 2` with `r_k = epsilon / exp(s + delta)^k`, `delta = 0.01 s`.
pub fn proof_rho_schedule(epsilon: f64, s: f64, k_max: usize) -> Vec<f64> {
    let delta = 0.01 * s;
    (1..=k_max).map(|k| 0.5 * epsilon / ((s + delta) * k as f64).exp()).collect()
}

/// Grid estimate of the Euclidean `rho`-neighbourhood volume of a cloud,
/// normalized by `(2 rho)^(n - t)`. Cell centres within distance `< rho` of
/// a cloud point count as inside.
pub fn minkowski_content_curve(
    cloud: &PointCloud,
    t: f64,
    rho_schedule: &[f64],
    grid_resolution: usize,
) -> Result<Vec<MinkowskiSample>> {
    if cloud.is_empty() {
        return Err(Error::ParameterOutOfRange("cloud is empty".into()));
    }
    if rho_schedule.windows(2).any(|w| w[1] >= w[0]) || rho_schedule.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::ParameterOutOfRange("rho schedule must be positive and decreasing".into()));
    }
    let n = cloud.dim;
    if !(1..=3).contains(&n) {
        return Err(Error::ParameterOutOfRange("Minkowski curves support n = 1, 2, 3".into()));
    }
    let h = 1.0 / grid_resolution as f64;
    let mut out = Vec::with_capacity(rho_schedule.len());
    for &rho in rho_schedule {
        if h > rho / 4.0 {
            return Err(Error::GridTooCoarse { cell: h, limit: rho / 4.0 });
        }
        let volume = neighborhood_cells(cloud, rho, h)? as f64 * h.powi(n as i32);
        let ratio = volume / (2.0 * rho).powf(n as f64 - t);
        out.push(MinkowskiSample { rho, volume, ratio });
    }
    Ok(out)
}

fn neighborhood_cells(cloud: &PointCloud, rho: f64, h: f64) -> Result<u64> {
    let n = cloud.dim;
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for p in cloud.iter() {
        for c in 0..n {
            lo[c] = lo[c].min(p[c]);
            hi[c] = hi[c].max(p[c]);
        }
    }
    // Cell i on axis c has centre origin[c] + (i + 0.5) h.
    let origin: Vec<f64> = lo.iter().map(|&l| ((l - rho) / h).floor() * h - h).collect();
    let dims: Vec<usize> = (0..n).map(|c| (((hi[c] + rho - origin[c]) / h).ceil() as usize) + 2).collect();
    let total: f64 = dims.iter().map(|&d| d as f64).product();
    if total > GRID_CELL_CAP as f64 {
        return Err(Error::CapExceeded(format!("{total} neighbourhood cells exceeds the grid cap")));
    }
    let mut mark = vec![0u8; total as usize];
    let strides: Vec<usize> = (0..n).scan(1usize, |acc, c| {
        let s = *acc;
        *acc *= dims[c];
        Some(s)
    }).collect();
    let rho2 = rho * rho;
    for p in cloud.iter() {
        stamp(p, 0, 0, rho2, h, &origin, &dims, &strides, &mut mark);
    }
    Ok(mark.iter().map(|&m| m as u64).sum())
}

/// Marks every cell centre within `sqrt(rem)` of `p` along axes `axis..n`,
/// filling the last axis as a contiguous span.
#[allow(clippy::too_many_arguments)]
fn stamp(
    p: &[f64],
    axis: usize,
    base: usize,
    rem: f64,
    h: f64,
    origin: &[f64],
    dims: &[usize],
    strides: &[usize],
    mark: &mut [u8],
) {
    let r = rem.sqrt();
    // centre_i = origin + (i + 0.5) h ; need |centre_i - p| < r
    let lo_f = ((p[axis] - r - origin[axis]) / h - 0.5).ceil();
    let hi_f = ((p[axis] + r - origin[axis]) / h - 0.5).floor();
    let lo_i = lo_f.max(0.0) as usize;
    let hi_i = (hi_f.min(dims[axis] as f64 - 1.0)) as isize;
    if (hi_i as f64) < lo_f.max(0.0) {
        return;
    }
    let hi_i = hi_i as usize;
    for i in lo_i..=hi_i {
        let d = origin[axis] + (i as f64 + 0.5) * h - p[axis];
        let left = rem - d * d;
        if left <= 0.0 {
            continue;
        }
        let idx = base + i * strides[axis];
        if axis + 1 == p.len() {
            mark[idx] = 1;
        } else {
            stamp(p, axis + 1, idx, left, h, origin, dims, strides, mark);
        }
    }
}

// ---------------------------------------------------------------------------
// Bound, classification, equivalence report
// ---------------------------------------------------------------------------

/// `n + P/s`, clamped to `n` when `|P| <= tolerance`.
pub fn dimension_bound_with_tolerance(n: usize, pressure: f64, s: f64, tolerance: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::NonPositiveRate(s));
    }
    if pressure.abs() <= tolerance {
        return Ok(n as f64);
    }
    if pressure > 0.0 {
        return Err(Error::PositivePressure(pressure));
    }
    Ok(n as f64 + pressure / s)
}

/// [`dimension_bound_with_tolerance`] at the exact-oracle tolerance.
pub fn dimension_bound(n: usize, pressure: f64, s: f64) -> Result<f64> {
    dimension_bound_with_tolerance(n, pressure, s, EXACT_TOLERANCE)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Classification {
    Attractor,
    NonAttractor,
    Inconclusive,
}

/// Attractor when `|P| + residual <= tolerance`, non-attractor when
/// `P < -(tolerance + residual)`, inconclusive in between.
pub fn classify(pressure: &PressureEstimate, tolerance: f64) -> Classification {
    let p = pressure.value;
    let r = pressure.residual;
    if p.abs() + r <= tolerance {
        Classification::Attractor
    } else if p < -(tolerance + r) {
        Classification::NonAttractor
    } else {
        Classification::Inconclusive
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    fn of(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EquivalenceCheck {
    pub claim: String,
    pub verdict: Verdict,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BoundReport {
    pub model: String,
    pub kind: ModelKind,
    pub n: usize,
    pub potential: PotentialLabel,
    pub s: ExpansionRate,
    pub pressure: PressureEstimate,
    pub bound: f64,
    pub classification: Classification,
    pub tolerance: f64,
    pub checks: Vec<EquivalenceCheck>,
    /// Equilibrium Markov measure of the unstable potential, when computed.
    pub measure: Option<MarkovMeasureStats>,
}

/// Default `k_max` for the expansion rate in reports.
pub const DEFAULT_RATE_K_MAX: usize = 8;

/// Bound and classification from a given pressure estimate.
pub fn bound_report(
    model: &ModelSystem,
    pressure: PressureEstimate,
    tolerance: f64,
    rate_k_max: usize,
) -> Result<BoundReport> {
    let potential = model.unstable_potential();
    let s = expansion_rate(model, rate_k_max.min(max_rate_k(model)))?;
    let bound = dimension_bound_with_tolerance(model.dim(), pressure.value, s.value, tolerance)?;
    let classification = classify(&pressure, tolerance);
    Ok(BoundReport {
        model: model.name.clone(),
        kind: model.kind,
        n: model.dim(),
        potential: potential.label,
        s,
        pressure,
        bound,
        classification,
        tolerance,
        checks: Vec::new(),
        measure: None,
    })
}

fn max_rate_k(model: &ModelSystem) -> usize {
    let bits = (model.symbols() as f64).log2_();
    if bits <= 0.0 {
        usize::MAX
    } else {
        ((crate::WORD_CAP_LOG2 / bits).floor() as usize).max(1)
    }
}

trait Log2 {
    fn log2_(self) -> f64;
}

impl Log2 for f64 {
    fn log2_(self) -> f64 {
        libm::log2(self)
    }
}

/// Spectral pressure of the unstable potential, the bound, the attractor
/// classification, and the chain `bound = n <=> P = 0 <=> attractor`, plus
/// the entropy identities of the equilibrium Markov measure:
/// `h + integral(phi^u) = P`, and when `P = 0` Pesin's formula
/// `h = sum of positive exponents` (otherwise the strict Margulis-Ruelle
/// inequality).
pub fn srb_equivalence_report(model: &ModelSystem) -> Result<BoundReport> {
    let tol = EXACT_TOLERANCE;
    let potential = model.unstable_potential();
    let p = pressure_spectral(model, &potential)?;
    let mut report = bound_report(model, PressureEstimate::spectral(p), tol, DEFAULT_RATE_K_MAX)?;
    let n = model.dim() as f64;

    let p_zero = p.abs() <= tol;
    let full = (report.bound - n).abs() <= tol;
    let attractor = report.classification == Classification::Attractor;
    let mut checks = Vec::new();
    let (set, dim_name) = match model.kind {
        ModelKind::Diffeomorphism => ("stable set", "dim W^s"),
        ModelKind::Expanding => ("repeller", "dim_B"),
    };
    checks.push(EquivalenceCheck {
        claim: format!("bound = n <=> P({}) = 0", potential.label.as_str()),
        verdict: Verdict::of(full == p_zero),
        detail: format!("bound = {} (n = {n}), P = {p:e}; both sides {}", report.bound, truth(full && p_zero)),
    });
    checks.push(EquivalenceCheck {
        claim: format!("P({}) = 0 <=> {set} has full dimension ({dim_name} = n, attractor)", potential.label.as_str()),
        verdict: Verdict::of(p_zero == attractor),
        detail: format!("classification {:?} at tolerance {tol:e}", report.classification),
    });

    let mu = equilibrium_measure(&model.transition, &potential)?;
    let stats = markov_measure_stats(model, &potential, &mu)?;
    let free_energy = stats.entropy + stats.potential_integral;
    checks.push(EquivalenceCheck {
        claim: "h(mu) + integral(phi) dmu = P for the equilibrium measure".into(),
        verdict: Verdict::of((free_energy - p).abs() <= tol),
        detail: format!("h = {}, integral = {}, P = {p}", stats.entropy, stats.potential_integral),
    });
    let lyap = stats.positive_exponent_sum();
    if p_zero {
        let claim = match model.kind {
            ModelKind::Diffeomorphism => "SRB measure: Pesin entropy formula h = sum of positive exponents",
            ModelKind::Expanding => "dim = n => invariant measure with h = sum of positive exponents",
        };
        checks.push(EquivalenceCheck {
            claim: claim.into(),
            verdict: Verdict::of((stats.entropy - lyap).abs() <= tol),
            detail: format!("h = {}, sum lambda_i m_i = {lyap}", stats.entropy),
        });
    } else {
        checks.push(EquivalenceCheck {
            claim: "no SRB measure: Margulis-Ruelle inequality h < sum of positive exponents is strict".into(),
            verdict: Verdict::of(stats.entropy < lyap - tol),
            detail: format!("h = {}, sum lambda_i m_i = {lyap}", stats.entropy),
        });
    }
    report.checks = checks;
    report.measure = Some(stats);
    Ok(report)
}

fn truth(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

/// Linear horseshoe whose stable-set dimension `1 + log 2 / log lambda_u`
/// equals `target`, with `lambda_s = 1/4`.
pub fn horseshoe_for_target_dimension(target: f64) -> Result<ModelSystem> {
    if !(target > 1.0 && target < 2.0) {
        return Err(Error::ParameterOutOfRange(format!("target dimension {target} must lie in (1, 2)")));
    }
    let lambda_u = 2.0f64.powf(1.0 / (target - 1.0));
    build_linear_horseshoe(lambda_u, 0.25)
}

/// Spectral pressure of the potential matching `label`, as an estimate.
pub fn spectral_estimate(model: &ModelSystem, potential: &Potential) -> Result<PressureEstimate> {
    Ok(PressureEstimate::spectral(pressure_spectral(model, potential)?))
}
