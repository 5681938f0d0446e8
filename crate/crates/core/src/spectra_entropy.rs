//! Entropy functionals on probability sequences and the entropy–rank bounds.
//!
//! All entropies are in bits.

use std::f64::consts::LOG2_E;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::linalg::{CVec, C64};
use crate::tensor_core::{DenseState, ReducedSpectrum, SchmidtSpectrum, SiteGeometry};

const SUM_TOL: f64 = 1e-10;
const ORDER_SLACK: f64 = 1e-14;
const PREFIX_SLACK: f64 = 1e-12;

/// Non-negative, non-increasing weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilitySequence {
    values: Vec<f64>,
}

impl ProbabilitySequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Validation("empty probability sequence".into()));
        }
        if values.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::Validation("probabilities must be finite and ≥ 0".into()));
        }
        if values.windows(2).any(|w| w[1] > w[0] + ORDER_SLACK) {
            return Err(Error::Validation("probabilities must be non-increasing".into()));
        }
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::Validation(format!("probabilities sum to {total}")));
        }
        Ok(Self { values })
    }

    /// Sorts descending, clamps tiny negatives from eigensolvers, then validates.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        for x in values.iter_mut() {
            if *x < 0.0 && *x > -1e-14 {
                *x = 0.0;
            }
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Self::new(values)
    }

    pub fn from_schmidt(spectrum: &SchmidtSpectrum) -> Self {
        Self {
            values: spectrum.probabilities(),
        }
    }

    pub fn from_reduced(spectrum: &ReducedSpectrum) -> Self {
        Self {
            values: spectrum.eigenvalues().to_vec(),
        }
    }

    pub fn uniform(r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::Validation("uniform sequence needs r ≥ 1".into()));
        }
        Self::new(vec![1.0 / r as f64; r])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of strictly positive entries.
    pub fn support_size(&self) -> usize {
        self.values.iter().filter(|&&x| x > 0.0).count()
    }

    /// `Σ_{k>r} p_k`, the squared truncation error after keeping `r` entries.
    pub fn tail(&self, r: usize) -> f64 {
        self.values.iter().skip(r).rev().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyValue {
    pub alpha: f64,
    pub value: f64,
}

pub fn von_neumann(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.log2())
        .sum::<f64>()
}

/// Rényi entropy of order `alpha`; `alpha = 1` is the von Neumann entropy.
pub fn renyi_entropy(p: &ProbabilitySequence, alpha: f64) -> Result<EntropyValue> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Validation(format!("alpha must be > 0, got {alpha}")));
    }
    let value = if alpha == 1.0 {
        von_neumann(&p.values)
    } else {
        let s: f64 = p
            .values
            .iter()
            .filter(|&&x| x > 0.0)
            .map(|&x| x.powf(alpha))
            .sum();
        s.log2() / (1.0 - alpha)
    };
    Ok(EntropyValue {
        alpha,
        value: value.max(0.0),
    })
}

/// Prefix-sum dominance of `a` over `b`; the shorter sequence is zero-padded.
pub fn majorizes(a: &ProbabilitySequence, b: &ProbabilitySequence) -> bool {
    let n = a.values.len().max(b.values.len());
    let (mut sa, mut sb) = (0.0, 0.0);
    for k in 0..n {
        sa += a.values.get(k).copied().unwrap_or(0.0);
        sb += b.values.get(k).copied().unwrap_or(0.0);
        if sa + PREFIX_SLACK < sb {
            return false;
        }
    }
    true
}

/// Lower bound on `S^α` for `α ∈ (0,1)` from the rank-`r` truncation weight.
pub fn renyi_lower_bound(epsilon_sq: f64, r: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Validation(format!("alpha must lie in (0,1), got {alpha}")));
    }
    if r < 2 {
        return Err(Error::Validation(format!("r must be ≥ 2, got {r}")));
    }
    if !(0.0..=1.0).contains(&epsilon_sq) {
        return Err(Error::Validation(format!("epsilon² must lie in [0,1], got {epsilon_sq}")));
    }
    if epsilon_sq == 0.0 {
        return Err(Error::BoundUndefined("epsilon² = 0 gives log2(0)".into()));
    }
    Ok(alpha / (1.0 - alpha) * (epsilon_sq / alpha).log2()
        + ((r - 1) as f64 / (1.0 - alpha)).log2())
}

/// Upper bound on `S^α` for `α > 1` from the rank-`r` truncation weight.
pub fn renyi_upper_bound(epsilon_sq: f64, r: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::Validation(format!("alpha must be > 1, got {alpha}")));
    }
    if r < 1 {
        return Err(Error::Validation("r must be ≥ 1".into()));
    }
    if !(0.0..1.0).contains(&epsilon_sq) {
        return Err(Error::Validation(format!("epsilon² must lie in [0,1), got {epsilon_sq}")));
    }
    Ok(alpha / (1.0 - alpha) * (1.0 - epsilon_sq).log2() + (r as f64).log2())
}

/// Smallest rank compatible with entropy `s` and approximation defect `g`, `2^{s−g}`.
pub fn rank_lower_bound(s: f64, g: f64) -> f64 {
    (s - g).exp2()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FinitenessReport {
    /// Fitted decay exponent of `σ_k ≈ C k^{−rate}`.
    pub fitted_rate: f64,
    /// Critical exponent `1/(2α)`.
    pub threshold: f64,
    /// Hypothesised exponent supplied by the caller.
    pub hypothesis: f64,
    /// `fitted_rate > threshold`.
    pub finite: bool,
    /// Whether the hypothesis itself clears the threshold.
    pub hypothesis_finite: bool,
    pub max_residual: f64,
}

/// Log–log regression of the nonzero singular values above `1e-12`.
///
/// The decision is taken on the fitted exponent; the hypothesised exponent
/// `s` is reported next to it so callers can compare the two.
pub fn finiteness_check(spectrum: &SchmidtSpectrum, s: f64, alpha: f64) -> Result<FinitenessReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Validation(format!("alpha must lie in (0,1], got {alpha}")));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = spectrum
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &sig)| sig > 1e-12)
        .map(|(k, &sig)| (((k + 1) as f64).ln(), sig.ln()))
        .unzip();
    if xs.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "{} singular values above 1e-12, need at least 4",
            xs.len()
        )));
    }
    let fit = linear_fit(&xs, &ys)?;
    let threshold = 1.0 / (2.0 * alpha);
    Ok(FinitenessReport {
        fitted_rate: -fit.slope,
        threshold,
        hypothesis: s,
        finite: -fit.slope > threshold,
        hypothesis_finite: s > threshold,
        max_residual: fit.max_residual,
    })
}

/// Thermal weights `exp(−βλ_k)/Z` of a finite spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsSpec {
    eigenvalues: Vec<f64>,
    beta: f64,
    /// `Σ exp(−β(λ_k − λ_0))`; the true partition value is this times `exp(−βλ_0)`.
    shifted_partition: f64,
}

impl GibbsSpec {
    pub fn new(eigenvalues: Vec<f64>, beta: f64) -> Result<Self> {
        if eigenvalues.is_empty() || eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation("eigenvalues must be finite and non-empty".into()));
        }
        if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Validation("eigenvalues must be non-decreasing".into()));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Validation(format!("beta must be > 0, got {beta}")));
        }
        let l0 = eigenvalues[0];
        let shifted_partition = eigenvalues.iter().map(|&l| (-beta * (l - l0)).exp()).sum();
        Ok(Self {
            eigenvalues,
            beta,
            shifted_partition,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `Z = Σ exp(−βλ_k)`.
    pub fn partition_value(&self) -> f64 {
        self.shifted_partition * (-self.beta * self.eigenvalues[0]).exp()
    }

    pub fn log2_partition(&self) -> f64 {
        self.shifted_partition.log2() - self.beta * self.eigenvalues[0] * LOG2_E
    }

    pub fn weights(&self) -> Vec<f64> {
        let l0 = self.eigenvalues[0];
        self.eigenvalues
            .iter()
            .map(|&l| (-self.beta * (l - l0)).exp() / self.shifted_partition)
            .collect()
    }

    /// Mean energy `Σ λ_k p_k`.
    pub fn energy(&self) -> f64 {
        thermal_energy(&self.eigenvalues, self.beta)
    }

    /// Exact `−Σ p_k log2 p_k`.
    pub fn entropy_bits(&self) -> f64 {
        von_neumann(&self.weights())
    }
}

fn thermal_energy(eigenvalues: &[f64], beta: f64) -> f64 {
    let l0 = eigenvalues[0];
    let (mut num, mut den) = (0.0, 0.0);
    for &l in eigenvalues {
        let w = (-beta * (l - l0)).exp();
        num += w * (l - l0);
        den += w;
    }
    l0 + num / den
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsBound {
    pub beta: f64,
    /// `βE·log2(e) + log2 Z` in bits.
    pub bound: f64,
    pub state: GibbsSpec,
}

/// Solves `E(β) = energy` by bisection and returns the maximal-entropy bound.
pub fn gibbs_entropy_bound(eigenvalues: &[f64], energy: f64) -> Result<GibbsBound> {
    const MAX_ITER: usize = 200;
    if eigenvalues.is_empty() || eigenvalues.iter().any(|x| !x.is_finite()) {
        return Err(Error::Validation("eigenvalues must be finite and non-empty".into()));
    }
    if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Validation("eigenvalues must be non-decreasing".into()));
    }
    let l0 = eigenvalues[0];
    let mean = eigenvalues.iter().sum::<f64>() / eigenvalues.len() as f64;
    if !(energy > l0 && energy < mean) {
        return Err(Error::Validation(format!(
            "energy {energy} outside the open interval ({l0}, {mean})"
        )));
    }
    let mut lo = 0.0;
    let mut hi = 1.0 / (mean - l0).max(f64::MIN_POSITIVE);
    let mut grown = 0;
    while thermal_energy(eigenvalues, hi) > energy {
        lo = hi;
        hi *= 2.0;
        grown += 1;
        if grown > MAX_ITER || !hi.is_finite() {
            return Err(Error::Numeric("could not bracket the inverse temperature".into()));
        }
    }
    let mut converged = false;
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if thermal_energy(eigenvalues, mid) > energy {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numeric("bisection did not converge in 200 iterations".into()));
    }
    let beta = 0.5 * (lo + hi);
    let state = GibbsSpec::new(eigenvalues.to_vec(), beta)?;
    let bound = beta * (energy - l0) * LOG2_E + state.shifted_partition.log2();
    Ok(GibbsBound { beta, bound, state })
}

/// The rank-one-convergent family on `2d` sites of local dimension 3.
///
/// `√(1−p)|2…2⟩ + √(p/2^d) Σ_{x ∈ {0,1}^d} |x⟩|x⟩`: as `p → 0` it approaches a
/// product state while its entanglement across a cut `j ≤ d` can stay large.
pub fn example_state(d: usize, p: f64) -> Result<DenseState> {
    if d < 1 {
        return Err(Error::Validation("d must be ≥ 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Validation(format!("p must lie in [0,1], got {p}")));
    }
    let sites = 2 * d;
    if sites > 30 {
        return Err(Error::Resource(format!("{sites} qutrit sites exceed the dense budget")));
    }
    let geometry = SiteGeometry::uniform(sites, 3)?;
    let mut amp = CVec::zeros(geometry.total_dim());
    let all_twos: usize = (0..sites).fold(0, |acc, _| acc * 3 + 2);
    amp[all_twos] = C64::new((1.0 - p).sqrt(), 0.0);
    let w = C64::new((p / (1u64 << d) as f64).sqrt(), 0.0);
    for x in 0..(1usize << d) {
        // bits of x, most significant first, as ternary digits 0/1
        let half = (0..d).fold(0usize, |acc, b| acc * 3 + ((x >> (d - 1 - b)) & 1));
        let idx = half * 3usize.pow(d as u32) + half;
        amp[idx] += w;
    }
    DenseState::new(geometry, amp)
}

/// Writes a sequence as CSV with header `k,value` (k is 1-based).
pub fn sequence_to_csv(path: &Path, p: &ProbabilitySequence) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["k", "value"])?;
    for (k, v) in p.values().iter().enumerate() {
        w.write_record([(k + 1).to_string(), format!("{v:e}")])?;
    }
    w.flush()?;
    Ok(())
}

pub fn sequence_from_csv(path: &Path) -> Result<ProbabilitySequence> {
    let mut r = csv::Reader::from_path(path)?;
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let v: f64 = rec
            .get(1)
            .ok_or_else(|| Error::Validation("missing value column".into()))?
            .trim()
            .parse()
            .map_err(|e| Error::Validation(format!("bad value: {e}")))?;
        values.push(v);
    }
    ProbabilitySequence::from_unsorted(values)
}

/// Writes entropy rows with header `alpha,value_bits`.
pub fn entropies_to_csv(path: &Path, rows: &[EntropyValue]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["alpha", "value_bits"])?;
    for e in rows {
        w.write_record([format!("{}", e.alpha), format!("{:.15e}", e.value)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[f64]) -> ProbabilitySequence {
        ProbabilitySequence::new(v.to_vec()).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(renyi_entropy(&seq(&[1.0]), 0.7).unwrap().value, 0.0);
        assert!((renyi_entropy(&seq(&[0.25; 4]), 1.0).unwrap().value - 2.0).abs() < 1e-15);
        let s2 = renyi_entropy(&seq(&[0.5, 0.25, 0.25]), 2.0).unwrap().value;
        assert!((s2 - 1.415037499278844).abs() < 1e-12);
        assert!(renyi_entropy(&seq(&[1.0]), 0.0).is_err());
        assert!(renyi_entropy(&seq(&[1.0]), -1.0).is_err());
    }

    #[test]
    fn sequence_validation() {
        assert!(ProbabilitySequence::new(vec![0.4, 0.6]).is_err());
        assert!(ProbabilitySequence::new(vec![0.6, 0.3]).is_err());
        assert!(ProbabilitySequence::new(vec![1.2, -0.2]).is_err());
        assert!(ProbabilitySequence::from_unsorted(vec![0.4, 0.6]).is_ok());
    }

    #[test]
    fn majorization_examples() {
        assert!(majorizes(&seq(&[1.0, 0.0]), &seq(&[0.5, 0.5])));
        assert!(!majorizes(&seq(&[0.6, 0.4]), &seq(&[0.7, 0.3])));
        assert!(majorizes(&seq(&[1.0]), &seq(&[0.5, 0.5])));
    }

    #[test]
    fn bound_examples() {
        assert!((renyi_lower_bound(0.5, 2, 0.5).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(renyi_lower_bound(0.0, 2, 0.5), Err(Error::BoundUndefined(_))));
        assert!((renyi_upper_bound(0.0, 4, 2.0).unwrap() - 2.0).abs() < 1e-14);
        assert!((renyi_upper_bound(0.5, 2, 2.0).unwrap() - 3.0).abs() < 1e-14);
        assert!(renyi_upper_bound(1.0, 2, 2.0).is_err());
        assert_eq!(rank_lower_bound(0.0, 0.0), 1.0);
        assert_eq!(rank_lower_bound(3.0, 0.0), 8.0);
    }

    #[test]
    fn lower_bound_becomes_vacuous_near_one() {
        let eps = 0.2;
        let a = renyi_lower_bound(eps, 4, 0.9).unwrap();
        let b = renyi_lower_bound(eps, 4, 0.999).unwrap();
        assert!(b < a && b < 0.0);
    }

    #[test]
    fn gibbs_rejects_out_of_range_energy() {
        let levels: Vec<f64> = (0..4).map(f64::from).collect();
        assert!(gibbs_entropy_bound(&levels, 0.0).is_err());
        assert!(gibbs_entropy_bound(&levels, 1.5).is_err());
        assert!(gibbs_entropy_bound(&[1.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn example_state_trivial_cases() {
        let s = example_state(2, 0.0).unwrap();
        for cut in 1..4 {
            let sp = crate::tensor_core::schmidt_spectrum(&s, cut).unwrap();
            assert_eq!(sp.values(), &[1.0]);
        }
        assert!(example_state(0, 0.5).is_err());
        assert!(example_state(2, 1.5).is_err());
    }
}
