use nalgebra::DMatrix;

use super::{assemble, NniSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, C64};
use crate::tensor_core::{DenseState, SiteGeometry};

/// Largest dimension handed to the dense Hermitian eigensolver.
pub const DENSE_EIGEN_CAP: usize = 4096;
/// Above this dimension ground states come from the Lanczos solver.
pub const GROUND_STATE_DENSE_LIMIT: usize = 512;

/// Full spectral decomposition with the ground energy shifted to zero.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    eigenvalues: Vec<f64>,
    eigenvectors: CMat,
    shift: f64,
    norm: f64,
    dims: Vec<usize>,
}

impl EigenSystem {
    /// Diagonalizes a Hermitian matrix acting on a chain with site dimensions `dims`.
    pub fn from_matrix(h: &CMat, dims: Vec<usize>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if h.nrows() != n || h.ncols() != n {
            return Err(Error::Validation("matrix does not match the site dimensions".into()));
        }
        if linalg::hermiticity_defect(h) > 1e-12 * h.norm().max(1.0) {
            return Err(Error::Validation("matrix is not self-adjoint".into()));
        }
        if n > DENSE_EIGEN_CAP {
            return Err(Error::Resource(format!(
                "dimension {n} exceeds the dense eigensolver cap {DENSE_EIGEN_CAP}"
            )));
        }
        let eig = linalg::eigh(h);
        if eig.values.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("eigensolver produced non-finite values".into()));
        }
        let shift = eig.values[0];
        let norm = eig.values.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        Ok(Self {
            eigenvalues: eig.values.iter().map(|x| x - shift).collect(),
            eigenvectors: eig.vectors,
            shift,
            norm,
            dims,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Shifted eigenvalues, `λ₀ = 0`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMat {
        &self.eigenvectors
    }

    /// The constant subtracted from the raw spectrum.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// `‖H‖` of the unshifted operator.
    pub fn hamiltonian_norm(&self) -> f64 {
        self.norm
    }

    /// `λ₁ − λ₀`, zero for a one-dimensional space.
    pub fn gap(&self) -> f64 {
        self.eigenvalues.get(1).copied().unwrap_or(0.0)
    }

    fn degeneracy_tol(&self) -> f64 {
        1e-12 * self.norm.max(1.0)
    }

    pub fn ground_degenerate(&self) -> bool {
        self.gap() <= self.degeneracy_tol()
    }

    pub fn excited_degenerate(&self) -> bool {
        self.eigenvalues.len() > 2
            && self.eigenvalues[2] - self.eigenvalues[1] <= self.degeneracy_tol()
    }

    /// Smallest eigenvalue separated from zero, i.e. the effective gap when
    /// the ground space is degenerate.
    pub fn first_nonzero(&self) -> Option<f64> {
        let tol = self.degeneracy_tol();
        self.eigenvalues.iter().copied().find(|&x| x > tol)
    }

    /// Number of eigenvalues in the numerical ground space.
    pub fn ground_multiplicity(&self) -> usize {
        let tol = self.degeneracy_tol();
        self.eigenvalues.iter().filter(|&&x| x <= tol).count()
    }

    pub fn ground_vector(&self) -> CVec {
        self.eigenvectors.column(0).into_owned()
    }

    pub fn ground_state(&self) -> Result<DenseState> {
        DenseState::normalized(SiteGeometry::new(self.dims.clone())?, self.ground_vector())
    }

    /// Projector onto the numerical ground space.
    pub fn ground_projector(&self) -> CMat {
        let m = self.ground_multiplicity();
        let v = self.eigenvectors.columns(0, m);
        &v * v.adjoint()
    }

    /// `V f(Λ) V†` on the shifted spectrum.
    pub fn apply_function<F: Fn(f64) -> C64>(&self, f: F) -> CMat {
        let eig = linalg::HermitianEigen {
            values: self.eigenvalues.clone(),
            vectors: self.eigenvectors.clone(),
        };
        eig.apply_function(f)
    }

    /// `max_k ‖H v_k − λ_k v_k‖` against the unshifted matrix `h`.
    pub fn max_residual(&self, h: &CMat) -> f64 {
        let hv = h * &self.eigenvectors;
        (0..self.dim())
            .map(|k| {
                let lam = C64::new(self.eigenvalues[k] + self.shift, 0.0);
                (hv.column(k) - self.eigenvectors.column(k) * lam).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.dim();
        (self.eigenvectors.adjoint() * &self.eigenvectors - CMat::identity(n, n)).norm()
    }
}

pub fn diagonalize(spec: &NniSpec) -> Result<EigenSystem> {
    diagonalize_with_cap(spec, DENSE_EIGEN_CAP)
}

pub fn diagonalize_with_cap(spec: &NniSpec, cap: usize) -> Result<EigenSystem> {
    let n = spec.geometry().total_dim();
    if n > cap.min(DENSE_EIGEN_CAP) {
        return Err(Error::Resource(format!(
            "dimension {n} exceeds the dense eigensolver cap {}",
            cap.min(DENSE_EIGEN_CAP)
        )));
    }
    let h = assemble(spec)?;
    EigenSystem::from_matrix(&h, spec.dims().to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Dense,
    Lanczos,
}

/// Ground state and first excitation of a chain.
#[derive(Debug, Clone)]
pub struct GroundState {
    /// Unshifted ground energy.
    pub energy: f64,
    /// `λ₁ − λ₀`.
    pub gap: f64,
    pub state: DenseState,
    pub residual: f64,
    pub solver: SolverKind,
}

impl GroundState {
    pub fn degenerate(&self) -> bool {
        self.gap <= 1e-9 * self.energy.abs().max(1.0)
    }
}

/// Ground state via dense diagonalization for small chains and Lanczos above
/// [`GROUND_STATE_DENSE_LIMIT`].
pub fn ground_state(spec: &NniSpec) -> Result<GroundState> {
    let n = spec.geometry().total_dim();
    if n <= GROUND_STATE_DENSE_LIMIT {
        let h = assemble(spec)?;
        let eig = EigenSystem::from_matrix(&h, spec.dims().to_vec())?;
        let state = eig.ground_state()?;
        let residual = {
            let v = state.amplitudes();
            (&h * v - v * C64::new(eig.shift, 0.0)).norm()
        };
        return Ok(GroundState {
            energy: eig.shift,
            gap: eig.gap(),
            state,
            residual,
            solver: SolverKind::Dense,
        });
    }
    let scale: f64 = (1..spec.d())
        .map(|k| linalg::operator_norm(&spec.bond_operator(k)))
        .sum::<f64>()
        .max(1.0);
    let tol = 1e-10 * scale;
    let apply = |v: &CVec| spec.apply(v);
    let start = crate::random::unit_vector(&mut crate::random::item_rng(0x1a2c, 0), n);
    let (e0, v0, residual) = lanczos_lowest(&apply, n, &[], start.clone(), tol, 120, 60)?;
    let (e1, _, _) = lanczos_lowest(&apply, n, std::slice::from_ref(&v0), start, tol, 120, 60)?;
    Ok(GroundState {
        energy: e0,
        gap: e1 - e0,
        state: DenseState::normalized(spec.geometry().clone(), v0)?,
        residual,
        solver: SolverKind::Lanczos,
    })
}

fn orthogonalize(w: &mut CVec, basis: &[CVec]) {
    for _ in 0..2 {
        for b in basis {
            let c = b.dotc(w);
            w.axpy(-c, b, C64::new(1.0, 0.0));
        }
    }
}

/// Lowest eigenpair of a Hermitian operator on the complement of `deflate`.
///
/// Restarted Lanczos with full reorthogonalization; each cycle builds up to
/// `krylov` vectors and restarts from the current Ritz vector. Returns
/// `(eigenvalue, eigenvector, residual norm)`.
pub fn lanczos_lowest<F>(
    apply: &F,
    n: usize,
    deflate: &[CVec],
    start: CVec,
    tol: f64,
    krylov: usize,
    max_restarts: usize,
) -> Result<(f64, CVec, f64)>
where
    F: Fn(&CVec) -> CVec,
{
    if deflate.len() >= n {
        return Err(Error::Validation("deflation space fills the whole space".into()));
    }
    let m_max = krylov.min(n - deflate.len()).max(1);
    let mut x = start;
    let mut best = (f64::INFINITY, x.clone(), f64::INFINITY);
    for _ in 0..=max_restarts {
        orthogonalize(&mut x, deflate);
        let nx = x.norm();
        if nx == 0.0 {
            return Err(Error::Numeric("start vector lies in the deflation space".into()));
        }
        x /= C64::new(nx, 0.0);
        let mut basis: Vec<CVec> = vec![x.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        for k in 0..m_max {
            let mut w = apply(&basis[k]);
            alphas.push(basis[k].dotc(&w).re);
            orthogonalize(&mut w, &basis);
            orthogonalize(&mut w, deflate);
            let beta = w.norm();
            if k + 1 == m_max || beta < 1e-13 {
                break;
            }
            betas.push(beta);
            basis.push(w / C64::new(beta, 0.0));
        }
        let m = alphas.len();
        let t = DMatrix::<f64>::from_fn(m, m, |i, j| {
            if i == j {
                alphas[i]
            } else if i + 1 == j {
                betas[i]
            } else if j + 1 == i {
                betas[j]
            } else {
                0.0
            }
        });
        let te = t.symmetric_eigen();
        let (kmin, theta) = te
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty tridiagonal");
        let mut ritz = CVec::zeros(n);
        for (i, b) in basis.iter().enumerate() {
            ritz.axpy(C64::new(te.eigenvectors[(i, kmin)], 0.0), b, C64::new(1.0, 0.0));
        }
        orthogonalize(&mut ritz, deflate);
        let nr = ritz.norm();
        ritz /= C64::new(nr, 0.0);
        let residual = (apply(&ritz) - &ritz * C64::new(theta, 0.0)).norm();
        if residual < best.2 {
            best = (theta, ritz.clone(), residual);
        }
        if residual <= tol {
            return Ok(best);
        }
        x = ritz;
    }
    Err(Error::Numeric(format!(
        "Lanczos residual {:.3e} above tolerance {tol:.3e} after {max_restarts} restarts",
        best.2
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nni_hamiltonian::tfi_chain;

    #[test]
    fn toy_diagonal_system() {
        let h = linalg::real_matrix(
            4,
            4,
            &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 2.0],
        );
        let e = EigenSystem::from_matrix(&h, vec![2, 2]).unwrap();
        assert_eq!(e.eigenvalues().len(), 4);
        assert!((e.gap() - 1.0).abs() < 1e-14);
        assert!(!e.ground_degenerate());
        assert!(e.excited_degenerate());
        assert!(e.max_residual(&h) < 1e-12);
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        let spec = tfi_chain(7, 1.5, 1.0).unwrap();
        let eig = diagonalize(&spec).unwrap();
        let apply = |v: &CVec| spec.apply(v);
        let start = crate::random::unit_vector(&mut crate::random::item_rng(1, 0), 128);
        let (e0, v0, _) = lanczos_lowest(&apply, 128, &[], start.clone(), 1e-10, 40, 50).unwrap();
        assert!((e0 - eig.shift()).abs() < 1e-9);
        let (e1, _, _) = lanczos_lowest(&apply, 128, &[v0], start, 1e-10, 40, 50).unwrap();
        assert!((e1 - e0 - eig.gap()).abs() < 1e-9);
    }

    #[test]
    fn cap_is_enforced() {
        let spec = tfi_chain(5, 2.0, 1.0).unwrap();
        assert!(matches!(diagonalize_with_cap(&spec, 16), Err(Error::Resource(_))));
    }
}
