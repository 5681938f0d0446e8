//! Ordinary least-squares fits used for rate estimation.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual.
    pub max_residual: f64,
    /// Residual sum of squares.
    pub rss: f64,
}

/// Fits `y ≈ slope·x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::Validation("x and y lengths differ".into()));
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "a line needs at least 2 points, got {}",
            xs.len()
        )));
    }
    let design = DMatrix::from_fn(xs.len(), 2, |i, c| if c == 0 { xs[i] } else { 1.0 });
    let fit = least_squares(&design, ys)?;
    Ok(LinearFit {
        slope: fit.coefficients[0],
        intercept: fit.coefficients[1],
        max_residual: fit.max_residual,
        rss: fit.rss,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub coefficients: Vec<f64>,
    pub max_residual: f64,
    pub rss: f64,
}

/// Minimizes `‖design·c − y‖₂` via SVD.
pub fn least_squares(design: &DMatrix<f64>, ys: &[f64]) -> Result<LeastSquares> {
    if design.nrows() != ys.len() {
        return Err(Error::Validation("design rows and data length differ".into()));
    }
    if ys.iter().any(|y| !y.is_finite()) || design.iter().any(|x| !x.is_finite()) {
        return Err(Error::Validation("non-finite data in least-squares fit".into()));
    }
    let y = DVector::from_column_slice(ys);
    let svd = design.clone().svd(true, true);
    let coeffs = svd
        .solve(&y, 1e-12)
        .map_err(|e| Error::Numeric(format!("least-squares solve failed: {e}")))?;
    let resid = design * &coeffs - &y;
    Ok(LeastSquares {
        coefficients: coeffs.iter().copied().collect(),
        max_residual: resid.iter().fold(0.0, |m, r| m.max(r.abs())),
        rss: resid.norm_squared(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-12);
        assert!((f.intercept - 3.0).abs() < 1e-12);
        assert!(f.max_residual < 1e-12);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(linear_fit(&[1.0], &[1.0]), Err(Error::InsufficientData(_))));
    }
}
