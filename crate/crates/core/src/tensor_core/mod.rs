//! Dense states, Schmidt spectra, tensor trains and reduced spectra.
//!
//! The matricization at cut `j` groups sites `1..=j` into the row index and
//! sites `j+1..=d` into the column index, both in row-major order with the
//! lowest-numbered site varying slowest.

mod io;
mod tt;

pub use io::{
    read_matrix, read_spectrum, read_state, spectrum_from_csv, spectrum_to_csv, write_matrix,
    write_spectrum, write_state, ArrayKind, MAGIC, FORMAT_VERSION,
};
pub use tt::{tt_decompose, tt_reconstruct, TtCore, TtState, DEFAULT_MEMORY_BUDGET};

use nalgebra::SVD;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, Interval, C64};

/// Relative threshold below which singular values count as zero.
pub const SINGULAR_CLAMP: f64 = 1e-14;
/// Tolerance on `‖ψ‖ = 1` for normalized states.
pub const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteGeometry {
    dims: Vec<usize>,
}

impl SiteGeometry {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::Validation(format!(
                "a chain needs at least 2 sites, got {}",
                dims.len()
            )));
        }
        if let Some(k) = dims.iter().position(|&n| n < 2) {
            return Err(Error::Validation(format!(
                "site {} has local dimension {} (< 2)",
                k + 1,
                dims[k]
            )));
        }
        dims.iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::Resource("total dimension overflows usize".into()))?;
        Ok(Self { dims })
    }

    pub fn uniform(d: usize, n: usize) -> Result<Self> {
        Self::new(vec![n; d])
    }

    pub fn d(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Product of the local dimensions of sites in `interval`.
    pub fn interval_dim(&self, interval: Interval) -> usize {
        self.dims[interval.first - 1..interval.last].iter().product()
    }

    /// `(dim of sites 1..=j, dim of sites j+1..=d)`.
    pub fn cut_dims(&self, cut: usize) -> (usize, usize) {
        let left = self.dims[..cut].iter().product();
        let right = self.dims[cut..].iter().product();
        (left, right)
    }

    pub fn check_cut(&self, cut: usize) -> Result<()> {
        if cut == 0 || cut >= self.d() {
            return Err(Error::Range(format!(
                "cut {cut} outside 1..={} for d = {}",
                self.d() - 1,
                self.d()
            )));
        }
        Ok(())
    }

    pub fn check_interval(&self, interval: Interval) -> Result<()> {
        interval.check_within(self.d())
    }

    pub fn full_interval(&self) -> Interval {
        Interval {
            first: 1,
            last: self.d(),
        }
    }
}

/// A pure state on the chain as a dense amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    geometry: SiteGeometry,
    amplitudes: CVec,
}

impl DenseState {
    /// Wraps a normalized amplitude vector.
    pub fn new(geometry: SiteGeometry, amplitudes: CVec) -> Result<Self> {
        let state = Self::unnormalized(geometry, amplitudes)?;
        state.check_normalized()?;
        Ok(state)
    }

    /// Wraps an amplitude vector without checking its norm.
    pub fn unnormalized(geometry: SiteGeometry, amplitudes: CVec) -> Result<Self> {
        if amplitudes.len() != geometry.total_dim() {
            return Err(Error::Validation(format!(
                "amplitude length {} does not match geometry dimension {}",
                amplitudes.len(),
                geometry.total_dim()
            )));
        }
        Ok(Self {
            geometry,
            amplitudes,
        })
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(geometry: SiteGeometry, amplitudes: CVec) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Validation("cannot normalize a zero vector".into()));
        }
        Self::new(geometry, amplitudes / C64::new(norm, 0.0))
    }

    /// Tensor product of per-site vectors (each normalized here).
    pub fn product(factors: &[CVec]) -> Result<Self> {
        let geometry = SiteGeometry::new(factors.iter().map(|f| f.len()).collect())?;
        let mut amp = CVec::from_element(1, linalg::ONE);
        for f in factors {
            let n = f.norm();
            if n == 0.0 {
                return Err(Error::Validation("zero factor in product state".into()));
            }
            amp = amp.kronecker(&(f / C64::new(n, 0.0)));
        }
        Self::new(geometry, amp)
    }

    /// Haar-random pure state.
    pub fn random<R: Rng + ?Sized>(geometry: SiteGeometry, rng: &mut R) -> Self {
        let v = crate::random::unit_vector(rng, geometry.total_dim());
        Self {
            geometry,
            amplitudes: v,
        }
    }

    pub fn geometry(&self) -> &SiteGeometry {
        &self.geometry
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVec {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn check_normalized(&self) -> Result<()> {
        let n = self.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation(format!(
                "state norm {n} differs from 1 by more than {NORM_TOL:e}"
            )));
        }
        Ok(())
    }

    /// `dim(1..=j) × dim(j+1..=d)` matricization.
    pub fn matricize(&self, cut: usize) -> CMat {
        let (rows, cols) = self.geometry.cut_dims(cut);
        linalg::reshape_rows(self.amplitudes.as_slice(), rows, cols)
    }

    /// Euclidean distance to another state of the same geometry.
    pub fn distance(&self, other: &DenseState) -> f64 {
        (&self.amplitudes - &other.amplitudes).norm()
    }
}

/// Singular values across one bipartite cut, non-increasing, zeros trimmed.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    cut: usize,
    values: Vec<f64>,
}

impl SchmidtSpectrum {
    /// Validates and wraps a spectrum (normalized, non-increasing, non-negative).
    pub fn new(cut: usize, values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::Validation("singular values must be finite and ≥ 0".into()));
        }
        if values.windows(2).any(|w| w[1] > w[0] + 1e-14) {
            return Err(Error::Validation("singular values must be non-increasing".into()));
        }
        let total: f64 = values.iter().map(|x| x * x).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!(
                "squared singular values sum to {total}, expected 1"
            )));
        }
        Ok(Self { cut, values })
    }

    pub fn cut(&self) -> usize {
        self.cut
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of nonzero singular values.
    pub fn rank(&self) -> usize {
        self.values.len()
    }

    /// Squared singular values, the spectrum of the reduced state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.values.iter().map(|s| s * s).collect()
    }
}

/// Eigenvalues of a reduced density matrix on a contiguous block.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSpectrum {
    keep: Interval,
    eigenvalues: Vec<f64>,
}

impl ReducedSpectrum {
    pub fn keep(&self) -> Interval {
        self.keep
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn into_eigenvalues(self) -> Vec<f64> {
        self.eigenvalues
    }
}

/// Sorted singular values of `m`, with the relative clamp applied.
pub(crate) fn clamped_singular_values(m: CMat) -> Vec<f64> {
    let svd = SVD::new(m, false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    clamp_relative(&mut s);
    s
}

pub(crate) fn clamp_relative(s: &mut [f64]) {
    let top = s.first().copied().unwrap_or(0.0);
    for x in s.iter_mut() {
        if *x <= SINGULAR_CLAMP * top {
            *x = 0.0;
        }
    }
}

pub fn schmidt_spectrum(state: &DenseState, cut: usize) -> Result<SchmidtSpectrum> {
    state.geometry.check_cut(cut)?;
    state.check_normalized()?;
    let mut values = clamped_singular_values(state.matricize(cut));
    values.retain(|&x| x > 0.0);
    SchmidtSpectrum::new(cut, values)
}

/// `sqrt(Σ_{k>r} σ_k²)`; zero once `r` reaches the spectrum length.
pub fn truncation_error(spectrum: &SchmidtSpectrum, r: usize) -> f64 {
    tail_norm(&spectrum.values, r)
}

pub(crate) fn tail_norm(values: &[f64], r: usize) -> f64 {
    values
        .iter()
        .skip(r)
        .rev()
        .map(|s| s * s)
        .sum::<f64>()
        .sqrt()
}

/// Spectrum of `Tr_complement |ψ⟩⟨ψ|` for the contiguous block `keep`.
///
/// The density matrix is formed explicitly on whichever side of the
/// bipartition is smaller; the other side has the same nonzero spectrum and
/// the remaining entries are zero.
pub fn reduced_spectrum(state: &DenseState, keep: Interval) -> Result<ReducedSpectrum> {
    state.geometry.check_interval(keep)?;
    state.check_normalized()?;
    let dims = state.geometry.dims();
    let a = linalg::keep_matricization(&state.amplitudes, dims, keep);
    let (inner, outer) = (a.nrows(), a.ncols());
    let gram = if inner <= outer {
        &a * a.adjoint()
    } else {
        a.adjoint() * &a
    };
    let mut eigenvalues: Vec<f64> = gram
        .symmetric_eigenvalues()
        .iter()
        .map(|&x| x.max(0.0))
        .collect();
    eigenvalues.resize(inner, 0.0);
    eigenvalues.sort_by(|x, y| y.total_cmp(x));
    Ok(ReducedSpectrum { keep, eigenvalues })
}

/// Reduced density matrix of `state` on `keep`.
pub fn reduced_density(state: &DenseState, keep: Interval) -> Result<CMat> {
    state.geometry.check_interval(keep)?;
    Ok(linalg::reduced_density(
        &state.amplitudes,
        state.geometry.dims(),
        keep,
    ))
}
