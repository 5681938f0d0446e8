use nalgebra::SVD;

use super::{tail_norm, DenseState, SiteGeometry, SINGULAR_CLAMP};
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, C64};

/// Default cap on dense vector length, in complex entries.
pub const DEFAULT_MEMORY_BUDGET: usize = 1 << 26;

/// One tensor-train core with index order `(left bond, physical, right bond)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TtCore {
    pub left: usize,
    pub phys: usize,
    pub right: usize,
    /// Row-major over `(left, phys, right)`.
    pub data: Vec<C64>,
}

impl TtCore {
    pub fn get(&self, a: usize, i: usize, b: usize) -> C64 {
        self.data[(a * self.phys + i) * self.right + b]
    }

    /// `(left·phys) × right` unfolding.
    pub fn left_unfolding(&self) -> CMat {
        CMat::from_row_slice(self.left * self.phys, self.right, &self.data)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TtState {
    geometry: SiteGeometry,
    cores: Vec<TtCore>,
}

impl TtState {
    pub fn new(geometry: SiteGeometry, cores: Vec<TtCore>) -> Result<Self> {
        if cores.len() != geometry.d() {
            return Err(Error::Validation(format!(
                "{} cores for {} sites",
                cores.len(),
                geometry.d()
            )));
        }
        for (k, c) in cores.iter().enumerate() {
            let expected_left = if k == 0 { 1 } else { cores[k - 1].right };
            if c.phys != geometry.dims()[k]
                || c.left != expected_left
                || c.data.len() != c.left * c.phys * c.right
            {
                return Err(Error::Validation(format!("core {} has inconsistent shape", k + 1)));
            }
        }
        if cores.last().map(|c| c.right) != Some(1) {
            return Err(Error::Validation("last core must have right rank 1".into()));
        }
        Ok(Self { geometry, cores })
    }

    pub fn geometry(&self) -> &SiteGeometry {
        &self.geometry
    }

    pub fn cores(&self) -> &[TtCore] {
        &self.cores
    }

    /// Interior bond ranks `r_1..r_{d-1}`.
    pub fn ranks(&self) -> Vec<usize> {
        self.cores[..self.cores.len() - 1]
            .iter()
            .map(|c| c.right)
            .collect()
    }

    /// Largest deviation of `U†U` from the identity over cores `1..d-1`.
    pub fn left_orthogonality_defect(&self) -> f64 {
        self.cores[..self.cores.len() - 1]
            .iter()
            .map(|c| {
                let u = c.left_unfolding();
                (u.adjoint() * &u - CMat::identity(c.right, c.right)).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Left-to-right TT-SVD with an error budget of `tolerance/√(d−1)` per cut.
///
/// When `max_rank` is given it caps every bond even if the tolerance would
/// then be exceeded.
pub fn tt_decompose(
    state: &DenseState,
    tolerance: f64,
    max_rank: Option<usize>,
) -> Result<TtState> {
    if !(tolerance >= 0.0) || !tolerance.is_finite() {
        return Err(Error::Validation(format!(
            "tolerance must be finite and ≥ 0, got {tolerance}"
        )));
    }
    if max_rank == Some(0) {
        return Err(Error::Validation("max_rank must be ≥ 1".into()));
    }
    state.check_normalized()?;
    let geometry = state.geometry().clone();
    let dims = geometry.dims().to_vec();
    let d = dims.len();
    let budget = tolerance / ((d - 1) as f64).sqrt();

    let mut cores = Vec::with_capacity(d);
    let mut rank = 1usize;
    let mut rest: usize = dims.iter().product();
    let mut carry: Vec<C64> = state.amplitudes().as_slice().to_vec();

    for &n in &dims[..d - 1] {
        rest /= n;
        let m = CMat::from_row_slice(rank * n, rest, &carry);
        let svd = SVD::new(m, true, true);
        let u = svd.u.expect("requested U");
        let v_t = svd.v_t.expect("requested V^T");
        let s = &svd.singular_values;
        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
        let sorted: Vec<f64> = order.iter().map(|&k| s[k]).collect();

        let mut keep = sorted
            .iter()
            .filter(|&&x| x > SINGULAR_CLAMP * sorted[0])
            .count()
            .max(1);
        while keep > 1 && tail_norm(&sorted, keep - 1) <= budget {
            keep -= 1;
        }
        if let Some(cap) = max_rank {
            keep = keep.min(cap);
        }

        let mut core = Vec::with_capacity(rank * n * keep);
        for row in 0..rank * n {
            for &k in &order[..keep] {
                core.push(u[(row, k)]);
            }
        }
        cores.push(TtCore {
            left: rank,
            phys: n,
            right: keep,
            data: core,
        });

        carry = Vec::with_capacity(keep * rest);
        for &k in &order[..keep] {
            let w = C64::new(s[k], 0.0);
            for col in 0..rest {
                carry.push(w * v_t[(k, col)]);
            }
        }
        rank = keep;
    }
    cores.push(TtCore {
        left: rank,
        phys: dims[d - 1],
        right: 1,
        data: carry,
    });
    TtState::new(geometry, cores)
}

/// Contracts the cores in site order into a dense vector.
///
/// The result is rescaled to unit norm only when `renormalize` is set; a
/// truncated train is otherwise returned as is.
pub fn tt_reconstruct(tt: &TtState, memory_budget: usize, renormalize: bool) -> Result<DenseState> {
    let total = tt.geometry.total_dim();
    if total > memory_budget {
        return Err(Error::Resource(format!(
            "dense state of {total} entries exceeds memory budget {memory_budget}"
        )));
    }
    // acc is (prefix dimension) × (current bond) in row-major order
    let mut acc: Vec<C64> = vec![C64::new(1.0, 0.0)];
    let mut prefix = 1usize;
    for c in &tt.cores {
        let mut next = vec![C64::new(0.0, 0.0); prefix * c.phys * c.right];
        for p in 0..prefix {
            for a in 0..c.left {
                let x = acc[p * c.left + a];
                if x == C64::new(0.0, 0.0) {
                    continue;
                }
                for i in 0..c.phys {
                    let base = (p * c.phys + i) * c.right;
                    for b in 0..c.right {
                        next[base + b] += x * c.get(a, i, b);
                    }
                }
            }
        }
        acc = next;
        prefix *= c.phys;
    }
    let amp = CVec::from_vec(acc);
    if renormalize {
        DenseState::normalized(tt.geometry.clone(), amp)
    } else {
        DenseState::unnormalized(tt.geometry.clone(), amp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::item_rng;

    #[test]
    fn bell_pair_has_rank_two() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let amp = CVec::from_vec(vec![
            C64::new(h, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(h, 0.0),
        ]);
        let s = DenseState::new(SiteGeometry::uniform(2, 2).unwrap(), amp).unwrap();
        let tt = tt_decompose(&s, 0.0, None).unwrap();
        assert_eq!(tt.ranks(), vec![2]);
    }

    #[test]
    fn rejects_bad_parameters() {
        let s = DenseState::random(SiteGeometry::uniform(3, 2).unwrap(), &mut item_rng(0, 0));
        assert!(matches!(tt_decompose(&s, -1.0, None), Err(Error::Validation(_))));
        assert!(matches!(tt_decompose(&s, f64::NAN, None), Err(Error::Validation(_))));
        assert!(matches!(tt_decompose(&s, 0.0, Some(0)), Err(Error::Validation(_))));
    }

    #[test]
    fn memory_budget_enforced() {
        let s = DenseState::random(SiteGeometry::uniform(4, 2).unwrap(), &mut item_rng(0, 1));
        let tt = tt_decompose(&s, 0.0, None).unwrap();
        assert!(matches!(tt_reconstruct(&tt, 8, false), Err(Error::Resource(_))));
    }

    #[test]
    fn max_rank_caps_bonds() {
        let s = DenseState::random(SiteGeometry::uniform(6, 2).unwrap(), &mut item_rng(0, 2));
        let tt = tt_decompose(&s, 0.0, Some(3)).unwrap();
        assert!(tt.ranks().iter().all(|&r| r <= 3));
    }
}
