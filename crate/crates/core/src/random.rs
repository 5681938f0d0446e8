//! Seeded random generators for reproducible suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CMat, CVec, C64};

/// Independent stream for item `index` of a suite seeded with `seed`.
///
/// Each item gets its own ChaCha stream so results do not depend on how the
/// items are scheduled across threads.
pub fn item_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-distributed unit vector of length `n`.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVec {
    let v = CVec::from_fn(n, |_, _| complex_gaussian(rng));
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

/// Random Hermitian matrix with Gaussian entries.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| complex_gaussian(rng));
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

/// Haar-ish unitary from the QR factorization of a Gaussian matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| complex_gaussian(rng));
    g.qr().q()
}

/// Random density matrix `G G† / tr(G G†)` of full rank.
pub fn density_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| complex_gaussian(rng));
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

/// Random probability vector sorted non-increasingly.
pub fn probability_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    // a random power spreads the draws between flat and sharply peaked
    let power = rng.random_range(0.5..6.0);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powf(power)).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// A sequence majorized by `a`, obtained from a few random T-transforms.
///
/// Each step replaces a pair `(a_i, a_j)` by a convex combination of itself
/// and its swap, which can only flatten the distribution.
pub fn t_transform_mix<R: Rng + ?Sized>(rng: &mut R, a: &[f64], steps: usize) -> Vec<f64> {
    let mut b = a.to_vec();
    let n = b.len();
    if n < 2 {
        return b;
    }
    for _ in 0..steps {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i == j {
            continue;
        }
        let t: f64 = rng.random();
        let (x, y) = (b[i], b[j]);
        b[i] = t * x + (1.0 - t) * y;
        b[j] = (1.0 - t) * x + t * y;
    }
    b.sort_by(|p, q| q.total_cmp(p));
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: f64 = item_rng(7, 3).random();
        let b: f64 = item_rng(7, 3).random();
        let c: f64 = item_rng(7, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn unitary_is_unitary() {
        let u = unitary(&mut item_rng(1, 0), 5);
        let err = (&u * u.adjoint() - CMat::identity(5, 5)).norm();
        assert!(err < 1e-12);
    }
}
