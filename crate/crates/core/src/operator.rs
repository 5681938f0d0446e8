//! Operators on the full chain space with a declared support interval.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Interval, C64};

/// A dense chain operator acting as the identity outside `support`.
///
/// `support == None` marks a multiple of the identity (including zero), which
/// is supported on every interval.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperator {
    matrix: CMat,
    dims: Vec<usize>,
    support: Option<Interval>,
    norm: f64,
}

impl LocalOperator {
    /// Wraps a full-space matrix; the support is declared, not verified here.
    pub fn new(matrix: CMat, dims: Vec<usize>, support: Option<Interval>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Validation(format!(
                "operator is {}×{}, chain dimension is {n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if let Some(s) = support {
            s.check_within(dims.len())?;
        }
        let norm = if linalg::is_hermitian(&matrix, 1e-10 * matrix.norm().max(1.0)) {
            linalg::hermitian_norm(&matrix)
        } else {
            linalg::operator_norm(&matrix)
        };
        Ok(Self {
            matrix,
            dims,
            support,
            norm,
        })
    }

    /// Embeds an operator acting on the sites of `support`.
    pub fn from_local(local: &CMat, dims: Vec<usize>, support: Interval) -> Result<Self> {
        support.check_within(dims.len())?;
        let (_, inner, _) = support.split_dims(&dims);
        if local.nrows() != inner || local.ncols() != inner {
            return Err(Error::Validation(format!(
                "local operator is {}×{}, support dimension is {inner}",
                local.nrows(),
                local.ncols()
            )));
        }
        let full = linalg::embed(local, &dims, support);
        Self::new(full, dims, Some(support))
    }

    pub fn zero(dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        Self {
            matrix: CMat::zeros(n, n),
            dims,
            support: None,
            norm: 0.0,
        }
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        Self {
            matrix: CMat::identity(n, n),
            dims,
            support: None,
            norm: 1.0,
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn support(&self) -> Option<Interval> {
        self.support
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.matrix)
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `‖A − P(A)‖_F` where `P` projects onto operators supported on the declared support.
    pub fn support_defect(&self) -> f64 {
        match self.support {
            Some(s) => {
                let p = linalg::project_onto_support(&self.matrix, &self.dims, s);
                linalg::frobenius_distance(&self.matrix, &p)
            }
            None => {
                let n = self.dim() as f64;
                let c = self.matrix.trace() / C64::new(n, 0.0);
                (&self.matrix - CMat::identity(self.dim(), self.dim()) * c).norm()
            }
        }
    }

    /// Operator restricted to its support (`Tr_complement / dim_complement`).
    pub fn local_matrix(&self) -> (Interval, CMat) {
        let support = self.support.unwrap_or(Interval {
            first: 1,
            last: self.dims.len(),
        });
        let (left, _, right) = support.split_dims(&self.dims);
        let reduced = linalg::partial_trace(&self.matrix, &self.dims, support)
            / C64::new((left * right) as f64, 0.0);
        (support, reduced)
    }

    /// Same matrix with a new declared support.
    pub fn with_support(self, support: Option<Interval>) -> Result<Self> {
        if let Some(s) = support {
            s.check_within(self.dims.len())?;
        }
        Ok(Self { support, ..self })
    }

    /// `A − c·I` keeping the support.
    pub fn shifted(&self, c: f64) -> Self {
        let n = self.dim();
        let matrix = &self.matrix - CMat::identity(n, n) * C64::new(c, 0.0);
        Self::new(matrix, self.dims.clone(), self.support).expect("shape preserved")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_defect_detects_nonlocal_part() {
        let dims = vec![2, 2, 2];
        let x = linalg::real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let op = LocalOperator::from_local(&x, dims.clone(), Interval::site(2).unwrap()).unwrap();
        assert!(op.support_defect() < 1e-14);
        assert!((op.norm() - 1.0).abs() < 1e-12);
        let wrong = op.clone().with_support(Some(Interval::site(1).unwrap())).unwrap();
        assert!(wrong.support_defect() > 0.5);
        let (iv, local) = op.local_matrix();
        assert_eq!(iv, Interval::site(2).unwrap());
        assert!(linalg::frobenius_distance(&local, &x) < 1e-14);
    }

    #[test]
    fn shape_checks() {
        let m = CMat::zeros(3, 3);
        assert!(LocalOperator::new(m, vec![2, 2], None).is_err());
        let m = CMat::zeros(4, 4);
        assert!(LocalOperator::new(m, vec![2, 2], Interval::new(1, 3).ok()).is_err());
    }
}
