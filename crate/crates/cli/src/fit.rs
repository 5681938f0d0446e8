//! Exponential decay fits on `(x, ln y)`.

use nnichain::fit::linear_fit;
use nnichain::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    /// Slope of `ln y` against `x`; negative for decay.
    pub rate: f64,
    pub intercept: f64,
    /// Largest absolute residual in `ln y`.
    pub max_residual: f64,
}

impl DecayFit {
    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.rate * x).exp()
    }
}

/// Least squares on `(x, ln y)` for at least three points with `y > 0`.
pub fn fit_decay(points: &[(f64, f64)]) -> Result<DecayFit> {
    if points.len() < 3 {
        return Err(Error::Validation(format!(
            "a decay fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some((x, y)) = points.iter().find(|(x, y)| !(*y > 0.0) || !y.is_finite() || !x.is_finite()) {
        return Err(Error::Validation(format!(
            "decay fit needs finite x and y > 0, got ({x}, {y})"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let line = linear_fit(&xs, &ys)?;
    Ok(DecayFit {
        rate: line.slope,
        intercept: line.intercept,
        max_residual: line.max_residual,
    })
}
