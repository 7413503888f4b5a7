//! Subshifts of finite type over the branch alphabet.
//!
//! Potentials are locally constant (one value per symbol), so Birkhoff sums
//! along a word are exact and the partition sum over a `(k, delta)`-separated
//! set of cylinder centres is `sum_w exp(S_k phi(w))`. The spectral route
//! computes the same pressure as the log Perron root of the weighted
//! transition matrix.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{perron_root, solve, Matrix};
#[allow(unused_imports)]
use crate::math::Float;
use crate::models::{ModelSystem, Potential};
use crate::{Error, Result, WORD_CAP_LOG2};

/// Square 0/1 matrix; `A[i][j] = 1` allows symbol `j` after symbol `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMatrix {
    size: usize,
    entries: Vec<u8>,
}

#[cfg(feature = "serde")]
impl serde::Serialize for TransitionMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&self.rows(), s)
    }
}

impl TransitionMatrix {
    pub fn full(size: usize) -> Self {
        Self { size, entries: vec![1; size * size] }
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let size = rows.len();
        if size == 0 || rows.iter().any(|r| r.len() != size) {
            return Err(Error::InvalidModel("transition matrix must be square and nonempty".into()));
        }
        if rows.iter().flatten().any(|&e| e > 1) {
            return Err(Error::InvalidModel("transition entries must be 0 or 1".into()));
        }
        let entries: Vec<u8> = rows.iter().flatten().copied().collect();
        let m = Self { size, entries };
        for i in 0..size {
            if !(0..size).any(|j| m.get(i, j)) {
                return Err(Error::InvalidModel(format!("transition row {i} has no successor")));
            }
            if !(0..size).any(|j| m.get(j, i)) {
                return Err(Error::InvalidModel(format!("transition column {i} has no predecessor")));
            }
        }
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.size + j] != 0
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        self.entries.chunks(self.size).map(|r| r.to_vec()).collect()
    }

    pub fn to_matrix(&self) -> Matrix {
        let rows: Vec<Vec<f64>> =
            self.entries.chunks(self.size).map(|r| r.iter().map(|&e| e as f64).collect()).collect();
        Matrix::from_rows(&rows).expect("square")
    }

    pub fn is_full(&self) -> bool {
        self.entries.iter().all(|&e| e == 1)
    }

    /// `true` iff some power is entrywise positive. Powers beyond Wielandt's
    /// bound `(n-1)^2 + 1` stay positive once positive, so repeated squaring
    /// past the bound decides it.
    pub fn is_primitive(&self) -> bool {
        let n = self.size;
        let bound = (n - 1) * (n - 1) + 1;
        let mut p: Vec<bool> = self.entries.iter().map(|&e| e != 0).collect();
        let mut power = 1usize;
        while power < bound {
            let mut q = vec![false; n * n];
            for i in 0..n {
                for k in 0..n {
                    if !p[i * n + k] {
                        continue;
                    }
                    for j in 0..n {
                        q[i * n + j] |= p[k * n + j];
                    }
                }
            }
            p = q;
            power *= 2;
        }
        p.iter().all(|&b| b)
    }

    /// Number of admissible words of length `k` (exact integer count).
    pub fn count_words(&self, k: usize) -> u128 {
        if k == 0 {
            return 1;
        }
        let n = self.size;
        let mut ends = vec![1u128; n];
        for _ in 1..k {
            let mut next = vec![0u128; n];
            for i in 0..n {
                for j in 0..n {
                    if self.get(i, j) {
                        next[j] = next[j].saturating_add(ends[i]);
                    }
                }
            }
            ends = next;
        }
        ends.iter().fold(0u128, |a, &b| a.saturating_add(b))
    }

    pub fn check_cap(&self, k: usize) -> Result<()> {
        check_word_cap(self.size, k)
    }

    /// Visits all admissible words of length `k` in lexicographic order.
    pub fn for_each_word(&self, k: usize, mut visit: impl FnMut(&[usize])) -> Result<()> {
        self.check_cap(k)?;
        if k == 0 {
            visit(&[]);
            return Ok(());
        }
        let mut word = Vec::with_capacity(k);
        self.walk(k, &mut word, &mut |w| visit(w));
        Ok(())
    }

    fn walk(&self, k: usize, word: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if word.len() == k {
            visit(word);
            return;
        }
        for s in 0..self.size {
            if let Some(&last) = word.last() {
                if !self.get(last, s) {
                    continue;
                }
            }
            word.push(s);
            self.walk(k, word, visit);
            word.pop();
        }
    }

    /// All admissible words of length `k`, lexicographically ordered.
    pub fn admissible_words(&self, k: usize) -> Result<Vec<Vec<usize>>> {
        let mut out = Vec::new();
        self.for_each_word(k, |w| out.push(w.to_vec()))?;
        Ok(out)
    }

    pub fn is_admissible(&self, word: &[usize]) -> bool {
        word.iter().all(|&s| s < self.size) && word.windows(2).all(|w| self.get(w[0], w[1]))
    }
}

/// Enforces `k * log2(symbols) <= 24`.
pub fn check_word_cap(symbols: usize, k: usize) -> Result<()> {
    let bits = k as f64 * (symbols as f64).ln() / 2.0f64.ln();
    if bits > WORD_CAP_LOG2 + 1e-9 {
        return Err(Error::CapExceeded(format!(
            "{symbols}^{k} words exceeds the 2^{WORD_CAP_LOG2} enumeration cap"
        )));
    }
    Ok(())
}

/// `S_k phi` along a word.
pub fn birkhoff_sum(potential: &Potential, word: &[usize]) -> f64 {
    word.iter().map(|&s| potential.values[s]).sum()
}

/// A symbol word with its geometric cylinder box.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Cylinder {
    pub word: Vec<usize>,
    pub rect: crate::models::Rect,
}

/// All nonempty depth-`k` cylinders in lexicographic word order.
pub fn cylinders(model: &ModelSystem, k: usize) -> Result<Vec<Cylinder>> {
    let words = model.transition.admissible_words(k)?;
    let mut out = Vec::with_capacity(words.len());
    for word in words {
        if let Some(rect) = model.cylinder_rect(&word)? {
            out.push(Cylinder { word, rect });
        }
    }
    Ok(out)
}

/// One representative point (the cylinder centre) per admissible `k`-word.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SeparatedSet {
    pub k: usize,
    pub delta: f64,
    pub words: Vec<Vec<usize>>,
    pub points: Vec<Vec<f64>>,
}

impl SeparatedSet {
    /// Brute-force check that every pair separates by `delta` within `k` steps.
    pub fn verify(&self, model: &ModelSystem) -> bool {
        let orbits: Vec<Vec<Vec<f64>>> = self
            .points
            .iter()
            .map(|p| {
                let mut orbit = vec![p.clone()];
                for _ in 1..self.k {
                    let last = orbit.last().unwrap();
                    match model.evaluate(last) {
                        Ok(q) => orbit.push(q),
                        Err(_) => break,
                    }
                }
                orbit
            })
            .collect();
        for i in 0..orbits.len() {
            for j in i + 1..orbits.len() {
                let sep = orbits[i]
                    .iter()
                    .zip(&orbits[j])
                    .any(|(a, b)| model.space.distance(a, b) >= self.delta);
                if !sep {
                    return false;
                }
            }
        }
        true
    }
}

/// Validates `delta` against the one-step branch separation.
pub fn check_delta(model: &ModelSystem, delta: f64) -> Result<()> {
    if !(delta > 0.0) {
        return Err(Error::ParameterOutOfRange(format!("delta = {delta} must be positive")));
    }
    let separation = model.branch_separation();
    if delta > separation {
        return Err(Error::DeltaTooLarge { delta, separation });
    }
    Ok(())
}

/// Half the one-step branch separation.
pub fn default_delta(model: &ModelSystem) -> f64 {
    0.5 * model.branch_separation()
}

pub fn separated_set(model: &ModelSystem, k: usize, delta: f64) -> Result<SeparatedSet> {
    check_delta(model, delta)?;
    let cyl = cylinders(model, k)?;
    let (words, points) = cyl.into_iter().map(|c| (c.word, c.rect.center())).unzip();
    Ok(SeparatedSet { k, delta, words, points })
}

/// `Z_k = sum over admissible k-words of exp(S_k phi)`, summed in
/// lexicographic order.
pub fn partition_sum(model: &ModelSystem, potential: &Potential, k: usize, delta: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::ParameterOutOfRange("k must be at least 1".into()));
    }
    check_potential(model, potential)?;
    check_delta(model, delta)?;
    partition_sum_unchecked(&model.transition, potential, k)
}

pub(crate) fn partition_sum_unchecked(a: &TransitionMatrix, potential: &Potential, k: usize) -> Result<f64> {
    a.check_cap(k)?;
    let mut total = 0.0;
    let mut word = Vec::with_capacity(k);
    partition_walk(a, potential, k, &mut word, 0.0, &mut total);
    Ok(total)
}

fn partition_walk(
    a: &TransitionMatrix,
    potential: &Potential,
    k: usize,
    word: &mut Vec<usize>,
    sum: f64,
    total: &mut f64,
) {
    if word.len() == k {
        *total += sum.exp();
        return;
    }
    for s in 0..a.size() {
        if let Some(&last) = word.last() {
            if !a.get(last, s) {
                continue;
            }
        }
        word.push(s);
        partition_walk(a, potential, k, word, sum + potential.values[s], total);
        word.pop();
    }
}

/// `Z_1, ..., Z_{k_max}`.
pub fn partition_sums(
    model: &ModelSystem,
    potential: &Potential,
    k_max: usize,
    delta: f64,
) -> Result<Vec<f64>> {
    check_potential(model, potential)?;
    check_delta(model, delta)?;
    model.transition.check_cap(k_max)?;
    (1..=k_max)
        .map(|k| partition_sum_unchecked(&model.transition, potential, k))
        .collect()
}

fn check_potential(model: &ModelSystem, potential: &Potential) -> Result<()> {
    if potential.len() != model.symbols() {
        return Err(Error::InvalidModel(format!(
            "potential has {} values for {} symbols",
            potential.len(),
            model.symbols()
        )));
    }
    Ok(())
}

/// `M[i][j] = A[i][j] * exp(phi_j)`.
pub fn weighted_matrix(a: &TransitionMatrix, potential: &Potential) -> Matrix {
    let n = a.size();
    let mut m = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if a.get(i, j) {
                m[(i, j)] = potential.values[j].exp();
            }
        }
    }
    m
}

/// Pressure as the log spectral radius of the weighted transition matrix.
pub fn pressure_spectral(model: &ModelSystem, potential: &Potential) -> Result<f64> {
    check_potential(model, potential)?;
    spectral_pressure(&model.transition, potential)
}

pub fn spectral_pressure(a: &TransitionMatrix, potential: &Potential) -> Result<f64> {
    if !a.is_primitive() {
        return Err(Error::NotMixing);
    }
    // Factor out the largest weight so the matrix entries stay in (0, 1].
    let shift = potential.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let m = weighted_matrix(a, &potential.shifted(-shift));
    Ok(perron_root(&m).value.ln() + shift)
}

/// Transition probabilities of a Markov measure on the coding.
#[derive(Debug, Clone, PartialEq)]
pub enum Stochastics {
    /// i.i.d. symbols with these probabilities.
    Bernoulli(Vec<f64>),
    /// Row-stochastic transition matrix.
    Markov(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LyapunovExponent {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MarkovMeasureStats {
    /// Entropy rate in nats per iterate.
    pub entropy: f64,
    /// Distinct exponents in descending order; multiplicities sum to `n`.
    pub exponents: Vec<LyapunovExponent>,
    pub potential_integral: f64,
    pub stationary: Vec<f64>,
}

impl MarkovMeasureStats {
    /// `sum_{lambda_i > 0} lambda_i m_i`
    pub fn positive_exponent_sum(&self) -> f64 {
        self.exponents
            .iter()
            .filter(|e| e.value > 0.0)
            .map(|e| e.value * e.multiplicity as f64)
            .sum()
    }
}

const STOCHASTIC_TOL: f64 = 1e-12;

fn markov_rows(a: &TransitionMatrix, probs: &Stochastics) -> Result<Vec<Vec<f64>>> {
    let n = a.size();
    let rows = match probs {
        Stochastics::Bernoulli(p) => {
            if p.len() != n {
                return Err(Error::IncompatibleStochastics(format!(
                    "{} probabilities for {n} symbols",
                    p.len()
                )));
            }
            for i in 0..n {
                for j in 0..n {
                    if p[i] > 0.0 && p[j] > 0.0 && !a.get(i, j) {
                        return Err(Error::IncompatibleStochastics(format!(
                            "Bernoulli weights put mass on the forbidden transition {i}->{j}"
                        )));
                    }
                }
            }
            vec![p.clone(); n]
        }
        Stochastics::Markov(rows) => {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::IncompatibleStochastics(format!("matrix must be {n}x{n}")));
            }
            for (i, r) in rows.iter().enumerate() {
                for (j, &x) in r.iter().enumerate() {
                    if x > 0.0 && !a.get(i, j) {
                        return Err(Error::IncompatibleStochastics(format!(
                            "positive probability on the forbidden transition {i}->{j}"
                        )));
                    }
                }
            }
            rows.clone()
        }
    };
    for (i, r) in rows.iter().enumerate() {
        if r.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::IncompatibleStochastics(format!("row {i} has a negative entry")));
        }
        let s: f64 = r.iter().sum();
        if (s - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::IncompatibleStochastics(format!("row {i} sums to {s}")));
        }
    }
    Ok(rows)
}

/// Stationary vector `pi P = pi`, `sum pi = 1`.
fn stationary(rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = rows.len();
    // (P^T - I) pi = 0 with the last equation replaced by normalization.
    let mut m = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = rows[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..n {
        m[(n - 1, j)] = 1.0;
    }
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = 1.0;
    let pi = solve(&m, &rhs).ok_or_else(|| {
        Error::IncompatibleStochastics("chain has no unique stationary distribution".into())
    })?;
    Ok(pi.into_iter().map(|x| if x.abs() < 1e-15 { 0.0 } else { x }).collect())
}

pub fn markov_measure_stats(
    model: &ModelSystem,
    potential: &Potential,
    probabilities: &Stochastics,
) -> Result<MarkovMeasureStats> {
    check_potential(model, potential)?;
    let rows = markov_rows(&model.transition, probabilities)?;
    let pi = match probabilities {
        Stochastics::Bernoulli(p) => p.clone(),
        Stochastics::Markov(_) => stationary(&rows)?,
    };

    let mut entropy = 0.0;
    for (i, r) in rows.iter().enumerate() {
        let h_row: f64 = r.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum();
        entropy += pi[i] * h_row;
    }
    let entropy = entropy.max(0.0);

    let n = model.dim();
    let mut exps = vec![0.0; n];
    for (i, b) in model.branches.iter().enumerate() {
        if pi[i] == 0.0 {
            continue;
        }
        for (e, sv) in exps.iter_mut().zip(b.linear.singular_values()) {
            *e += pi[i] * sv.ln();
        }
    }
    let mut exponents: Vec<LyapunovExponent> = Vec::new();
    for e in exps {
        match exponents.last_mut() {
            Some(last) if (last.value - e).abs() <= 1e-12 => last.multiplicity += 1,
            _ => exponents.push(LyapunovExponent { value: e, multiplicity: 1 }),
        }
    }

    let potential_integral = pi.iter().zip(&potential.values).map(|(p, v)| p * v).sum();
    Ok(MarkovMeasureStats { entropy, exponents, potential_integral, stationary: pi })
}

/// The Markov measure maximizing `h + integral of phi` for a locally constant
/// potential: `P[i][j] = A[i][j] e^{phi_j} v_j / (rho v_i)` with `v` the right
/// Perron vector of the weighted matrix. Zero potential gives the Parry
/// measure of maximal entropy.
pub fn equilibrium_measure(a: &TransitionMatrix, potential: &Potential) -> Result<Stochastics> {
    if !a.is_primitive() {
        return Err(Error::NotMixing);
    }
    let shift = potential.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let m = weighted_matrix(a, &potential.shifted(-shift));
    let root = perron_root(&m);
    let n = a.size();
    let v = &root.right;
    let rows = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|j| m[(i, j)] * v[j] / (root.value * v[i])).collect();
            // Renormalize away rounding so rows pass the stochastic check.
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= s);
            row
        })
        .collect();
    Ok(Stochastics::Markov(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_doubling_map, build_golden_mean_map, build_linear_horseshoe, PotentialLabel};

    fn golden() -> TransitionMatrix {
        TransitionMatrix::from_rows(&[vec![1, 1], vec![1, 0]]).unwrap()
    }

    #[test]
    fn primitivity_examples() {
        assert!(TransitionMatrix::full(2).is_primitive());
        let swap = TransitionMatrix::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert!(!swap.is_primitive());
        assert!(golden().is_primitive());
    }

    #[test]
    fn primitivity_matches_brute_force_powers() {
        // Every 3x3 0/1 matrix with nonzero rows and columns.
        for bits in 0u32..512 {
            let rows: Vec<Vec<u8>> =
                (0..3).map(|i| (0..3).map(|j| ((bits >> (3 * i + j)) & 1) as u8).collect()).collect();
            let Ok(a) = TransitionMatrix::from_rows(&rows) else { continue };
            let m = a.to_matrix();
            let mut p = m.clone();
            let mut brute = false;
            for _ in 0..16 {
                if p.as_slice().iter().all(|&x| x > 0.0) {
                    brute = true;
                    break;
                }
                p = p.mul(&m);
            }
            assert_eq!(a.is_primitive(), brute, "{rows:?}");
        }
    }

    #[test]
    fn word_enumeration() {
        assert_eq!(TransitionMatrix::full(2).admissible_words(3).unwrap().len(), 8);
        let w = golden().admissible_words(3).unwrap();
        assert_eq!(
            w,
            vec![vec![0, 0, 0], vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0], vec![1, 0, 1]]
        );
        assert_eq!(TransitionMatrix::full(2).admissible_words(1).unwrap(), vec![vec![0], vec![1]]);
        assert_eq!(golden().count_words(3), 5);
    }

    #[test]
    fn word_cap() {
        assert!(TransitionMatrix::full(2).admissible_words(25).is_err());
        assert!(check_word_cap(2, 24).is_ok());
        assert!(matches!(check_word_cap(5, 11), Err(Error::CapExceeded(_))));
    }

    #[test]
    fn birkhoff_examples() {
        let h = build_linear_horseshoe(3.0, 0.25).unwrap();
        let pu = h.potential(PotentialLabel::PhiU).unwrap();
        assert!((birkhoff_sum(&pu, &[0, 1, 1]) + 3.0 * 3.0f64.ln()).abs() < 1e-15);
        let d = build_doubling_map(2).unwrap();
        let phi = d.potential(PotentialLabel::Phi).unwrap();
        assert!((birkhoff_sum(&phi, &[1; 7]) + 7.0 * 2.0f64.ln()).abs() < 1e-14);
        let (a, b) = (0.3, -1.7);
        assert!((birkhoff_sum(&Potential::custom(vec![a, b]), &[0, 1, 0]) - (2.0 * a + b)).abs() < 1e-15);
    }

    #[test]
    fn partition_sum_examples() {
        let h = build_linear_horseshoe(3.0, 0.25).unwrap();
        let pu = h.potential(PotentialLabel::PhiU).unwrap();
        let delta = default_delta(&h);
        for k in 1..=8 {
            let z = partition_sum(&h, &pu, k, delta).unwrap();
            assert!(((z.ln() / k as f64) - (2.0f64 / 3.0).ln()).abs() < 1e-14);
        }
        // Direct enumeration at k = 5.
        let direct: f64 = h
            .transition
            .admissible_words(5)
            .unwrap()
            .iter()
            .map(|w| birkhoff_sum(&pu, w).exp())
            .sum();
        assert!((partition_sum(&h, &pu, 5, delta).unwrap() - direct).abs() < 1e-15);

        let d = build_doubling_map(2).unwrap();
        let phi = d.potential(PotentialLabel::Phi).unwrap();
        for k in 1..=10 {
            assert!((partition_sum(&d, &phi, k, default_delta(&d)).unwrap() - 1.0).abs() < 1e-13);
        }

        let g = build_golden_mean_map().unwrap();
        assert_eq!(partition_sum(&g, &Potential::zero(2), 3, default_delta(&g)).unwrap(), 5.0);
    }

    #[test]
    fn delta_guard() {
        let h = build_linear_horseshoe(3.0, 0.25).unwrap();
        let pu = h.potential(PotentialLabel::PhiU).unwrap();
        // Domains are 1/3 apart in x.
        assert!(matches!(partition_sum(&h, &pu, 3, 0.5), Err(Error::DeltaTooLarge { .. })));
        assert!(partition_sum(&h, &pu, 3, 0.3).is_ok());
    }

    #[test]
    fn separated_sets_are_separated() {
        for model in [
            build_linear_horseshoe(3.0, 0.25).unwrap(),
            build_doubling_map(2).unwrap(),
            build_doubling_map(3).unwrap(),
            build_golden_mean_map().unwrap(),
        ] {
            for k in 1..=6 {
                let s = separated_set(&model, k, default_delta(&model)).unwrap();
                assert_eq!(s.points.len() as u128, model.transition.count_words(k));
                assert!(s.verify(&model), "{} k={k}", model.name);
            }
        }
    }

    #[test]
    fn spectral_examples() {
        let h = build_linear_horseshoe(3.0, 0.25).unwrap();
        let p = pressure_spectral(&h, &h.potential(PotentialLabel::PhiU).unwrap()).unwrap();
        assert!((p - (2.0f64.ln() - 3.0f64.ln())).abs() < 1e-14);
        assert!((p + 0.405_465_108_108_164_4).abs() < 1e-14);

        let d = build_doubling_map(2).unwrap();
        let p = pressure_spectral(&d, &d.potential(PotentialLabel::Phi).unwrap()).unwrap();
        assert!(p.abs() < 1e-14);
        let p0 = pressure_spectral(&d, &Potential::zero(2)).unwrap();
        assert!((p0 - 2.0f64.ln()).abs() < 1e-14);

        let swap = TransitionMatrix::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(spectral_pressure(&swap, &Potential::zero(2)), Err(Error::NotMixing));
    }

    #[test]
    fn markov_stats_examples() {
        let d = build_doubling_map(2).unwrap();
        let phi = d.potential(PotentialLabel::Phi).unwrap();
        let s = markov_measure_stats(&d, &phi, &Stochastics::Bernoulli(vec![0.5, 0.5])).unwrap();
        assert!((s.entropy - 2.0f64.ln()).abs() < 1e-15);
        assert_eq!(s.exponents.len(), 1);
        assert_eq!(s.exponents[0].multiplicity, 1);
        assert!((s.exponents[0].value - 2.0f64.ln()).abs() < 1e-15);
        assert!((s.entropy - s.positive_exponent_sum()).abs() < 1e-15);

        let h = build_linear_horseshoe(3.0, 0.25).unwrap();
        let pu = h.potential(PotentialLabel::PhiU).unwrap();
        let s = markov_measure_stats(&h, &pu, &Stochastics::Bernoulli(vec![0.5, 0.5])).unwrap();
        assert!((s.entropy - 2.0f64.ln()).abs() < 1e-15);
        assert_eq!(s.exponents.len(), 2);
        assert!((s.exponents[0].value - 3.0f64.ln()).abs() < 1e-14);
        assert!((s.exponents[1].value - 0.25f64.ln()).abs() < 1e-14);
        assert!(s.entropy < s.positive_exponent_sum());

        let point = markov_measure_stats(&h, &pu, &Stochastics::Bernoulli(vec![1.0, 0.0])).unwrap();
        assert_eq!(point.entropy, 0.0);
    }

    #[test]
    fn incompatible_stochastics() {
        let g = build_golden_mean_map().unwrap();
        let z = Potential::zero(2);
        assert!(matches!(
            markov_measure_stats(&g, &z, &Stochastics::Bernoulli(vec![0.5, 0.5])),
            Err(Error::IncompatibleStochastics(_))
        ));
        assert!(matches!(
            markov_measure_stats(&g, &z, &Stochastics::Markov(vec![vec![0.5, 0.5], vec![0.5, 0.5]])),
            Err(Error::IncompatibleStochastics(_))
        ));
        assert!(matches!(
            markov_measure_stats(&g, &z, &Stochastics::Bernoulli(vec![0.7, 0.7])),
            Err(Error::IncompatibleStochastics(_))
        ));
    }

    #[test]
    fn parry_measure_attains_topological_entropy() {
        let g = build_golden_mean_map().unwrap();
        let z = Potential::zero(2);
        let parry = equilibrium_measure(&g.transition, &z).unwrap();
        let s = markov_measure_stats(&g, &z, &parry).unwrap();
        let golden_ratio = (1.0 + 5.0f64.sqrt()) / 2.0;
        assert!((s.entropy - golden_ratio.ln()).abs() < 1e-13);
    }
}
