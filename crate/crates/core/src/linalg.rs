//! Dense complex linear algebra helpers on top of nalgebra.
//!
//! Site-ordered tensor products use the row-major convention throughout the
//! crate: for sites `1..d` the flat index is `((i_1 * n_2 + i_2) * n_3 + ...)`,
//! i.e. site 1 is the slowest index.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Contiguous, inclusive, 1-based site interval `[first, last]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct Interval {
    pub first: usize,
    pub last: usize,
}

impl Interval {
    pub fn new(first: usize, last: usize) -> Result<Self> {
        if first == 0 || first > last {
            return Err(Error::Validation(format!(
                "interval [{first}, {last}] is not a non-empty 1-based range"
            )));
        }
        Ok(Self { first, last })
    }

    pub fn site(j: usize) -> Result<Self> {
        Self::new(j, j)
    }

    /// Builds `[first, last] ∩ [1, d]` from signed endpoints.
    pub fn clipped(first: i64, last: i64, d: usize) -> Result<Self> {
        let a = first.max(1);
        let b = last.min(d as i64);
        if a > b {
            return Err(Error::Range(format!(
                "interval [{first}, {last}] does not meet [1, {d}]"
            )));
        }
        Self::new(a as usize, b as usize)
    }

    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.first <= other.first && other.last <= self.last
    }

    pub fn check_within(&self, d: usize) -> Result<()> {
        if self.last > d {
            return Err(Error::Range(format!(
                "interval [{}, {}] exceeds chain length {d}",
                self.first, self.last
            )));
        }
        Ok(())
    }

    /// Dimensions `(left, inner, right)` of the split `H_{1,a-1} ⊗ H_{a,b} ⊗ H_{b+1,d}`.
    pub fn split_dims(&self, dims: &[usize]) -> (usize, usize, usize) {
        let left = dims[..self.first - 1].iter().product();
        let inner = dims[self.first - 1..self.last].iter().product();
        let right = dims[self.last..].iter().product();
        (left, inner, right)
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{},{}]", self.first, self.last)
    }
}

pub fn adjoint(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> CMat {
    CMat::from_row_iterator(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)))
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Largest singular value.
pub fn operator_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Operator norm of a Hermitian matrix, `max |λ|`.
pub fn hermitian_norm(m: &CMat) -> f64 {
    let e = m.clone().symmetric_eigenvalues();
    e.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn hermiticity_defect(m: &CMat) -> f64 {
    (m - m.adjoint()).norm()
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    hermiticity_defect(m) <= tol
}

/// Spectral decomposition of a Hermitian matrix with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl HermitianEigen {
    /// Reassembles `V f(Λ) V†`.
    pub fn apply_function<F: Fn(f64) -> C64>(&self, f: F) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            for r in 0..n {
                scaled[(r, k)] *= w;
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

pub fn eigh(m: &CMat) -> HermitianEigen {
    let n = m.nrows();
    // symmetrize to remove rounding asymmetry before the solver sees it
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    HermitianEigen { values, vectors }
}

/// `exp(i t H)` for Hermitian `H` given its eigendecomposition.
pub fn unitary_evolution(eig: &HermitianEigen, t: f64) -> CMat {
    eig.apply_function(|lam| C64::from_polar(1.0, lam * t))
}

/// Embeds `op` (acting on `interval`) as `I_left ⊗ op ⊗ I_right`.
pub fn embed(op: &CMat, dims: &[usize], interval: Interval) -> CMat {
    let (left, inner, right) = interval.split_dims(dims);
    assert_eq!(op.nrows(), inner, "operator does not match interval dimension");
    let n = left * inner * right;
    let mut out = CMat::zeros(n, n);
    for l in 0..left {
        for a in 0..inner {
            for b in 0..inner {
                let v = op[(a, b)];
                if v == ZERO {
                    continue;
                }
                for r in 0..right {
                    out[((l * inner + a) * right + r, (l * inner + b) * right + r)] = v;
                }
            }
        }
    }
    out
}

/// Applies `I_left ⊗ op ⊗ I_right` to a state vector without forming the full matrix.
pub fn apply_embedded(op: &CMat, dims: &[usize], interval: Interval, v: &CVec) -> CVec {
    let (left, inner, right) = interval.split_dims(dims);
    let mut out = CVec::zeros(v.len());
    let mut buf = vec![ZERO; inner];
    for l in 0..left {
        for r in 0..right {
            for (a, slot) in buf.iter_mut().enumerate() {
                *slot = v[(l * inner + a) * right + r];
            }
            for a in 0..inner {
                let mut acc = ZERO;
                for (b, x) in buf.iter().enumerate() {
                    acc += op[(a, b)] * x;
                }
                out[(l * inner + a) * right + r] = acc;
            }
        }
    }
    out
}

/// Partial trace of an operator on the full chain onto `keep`.
pub fn partial_trace(op: &CMat, dims: &[usize], keep: Interval) -> CMat {
    let (left, inner, right) = keep.split_dims(dims);
    assert_eq!(op.nrows(), left * inner * right);
    let mut out = CMat::zeros(inner, inner);
    for a in 0..inner {
        for b in 0..inner {
            let mut acc = ZERO;
            for l in 0..left {
                for r in 0..right {
                    acc += op[((l * inner + a) * right + r, (l * inner + b) * right + r)];
                }
            }
            out[(a, b)] = acc;
        }
    }
    out
}

/// `Tr_complement(A)/dim(complement)` re-embedded as `I ⊗ · ⊗ I`.
///
/// This is the orthogonal projection (in Hilbert–Schmidt inner product) onto
/// operators supported on `keep`, i.e. partial expectation in the maximally
/// mixed state of the complement.
pub fn project_onto_support(op: &CMat, dims: &[usize], keep: Interval) -> CMat {
    let (left, inner, right) = keep.split_dims(dims);
    let reduced = partial_trace(op, dims, keep) / C64::new((left * right) as f64, 0.0);
    debug_assert_eq!(reduced.nrows(), inner);
    embed(&reduced, dims, keep)
}

/// Reduced density matrix of a pure state on `keep`, `Tr_complement |ψ⟩⟨ψ|`.
pub fn reduced_density(amplitudes: &CVec, dims: &[usize], keep: Interval) -> CMat {
    let a = keep_matricization(amplitudes, dims, keep);
    &a * a.adjoint()
}

/// Rearranges amplitudes into a `dim(keep) × dim(complement)` matrix.
pub fn keep_matricization(amplitudes: &CVec, dims: &[usize], keep: Interval) -> CMat {
    let (left, inner, right) = keep.split_dims(dims);
    let mut a = CMat::zeros(inner, left * right);
    for l in 0..left {
        for k in 0..inner {
            for r in 0..right {
                a[(k, l * right + r)] = amplitudes[(l * inner + k) * right + r];
            }
        }
    }
    a
}

/// Row-major reshape of a vector into `rows × cols`.
pub fn reshape_rows(v: &[C64], rows: usize, cols: usize) -> CMat {
    CMat::from_row_slice(rows, cols, v)
}

/// Approximate equality in Frobenius norm.
pub fn frobenius_distance(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x() -> CMat {
        real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    #[test]
    fn embed_matches_kron() {
        let dims = [2, 3, 2];
        let op = CMat::from_fn(3, 3, |i, j| C64::new((i + 2 * j) as f64, i as f64 - j as f64));
        let expect = kron(&kron(&identity(2), &op), &identity(2));
        let got = embed(&op, &dims, Interval::site(2).unwrap());
        assert!(frobenius_distance(&expect, &got) < 1e-14);
    }

    #[test]
    fn apply_embedded_matches_dense() {
        let dims = [2, 2, 2];
        let iv = Interval::new(2, 3).unwrap();
        let op = kron(&pauli_x(), &pauli_x());
        let v = CVec::from_fn(8, |i, _| C64::new(i as f64, 1.0));
        let dense = embed(&op, &dims, iv) * &v;
        let fast = apply_embedded(&op, &dims, iv, &v);
        assert!((dense - fast).norm() < 1e-14);
    }

    #[test]
    fn partial_trace_inverts_embedding() {
        let dims = [2, 3, 2];
        let iv = Interval::site(2).unwrap();
        let op = CMat::from_fn(3, 3, |i, j| C64::new((i * j) as f64, 0.0));
        let full = embed(&op, &dims, iv);
        let back = partial_trace(&full, &dims, iv) / C64::new(4.0, 0.0);
        assert!(frobenius_distance(&op, &back) < 1e-14);
    }

    #[test]
    fn interval_validation() {
        assert!(Interval::new(0, 2).is_err());
        assert!(Interval::new(3, 2).is_err());
        assert_eq!(Interval::clipped(-3, 10, 6).unwrap(), Interval::new(1, 6).unwrap());
        assert!(Interval::clipped(7, 9, 6).is_err());
    }

    #[test]
    fn eigh_sorted_and_reconstructs() {
        let m = real_matrix(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 1.0]);
        let e = eigh(&m);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let back = e.apply_function(|x| C64::new(x, 0.0));
        assert!(frobenius_distance(&m, &back) < 1e-12);
        assert!((operator_norm(&m) - hermitian_norm(&m)).abs() < 1e-12);
    }
}
