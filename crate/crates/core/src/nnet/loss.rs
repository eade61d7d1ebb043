//! Gaussian negative log-likelihood.

use crate::error::{Error, Result};
use crate::nnet::GaussianPrediction;

/// `0.5·ln(σ²) + (y − μ)² / (2σ²)`.
///
/// The additive constant `0.5·ln(2π)` is omitted; it does not affect
/// optimization, but reported losses are comparable only across runs of this
/// crate, not against conventions that keep the constant.
pub fn gaussian_nll(pred: &GaussianPrediction, y: f64) -> Result<f64> {
    if pred.variance.is_nan() || pred.variance <= 0.0 {
        return Err(Error::Domain(format!(
            "gaussian_nll requires positive variance, got {}",
            pred.variance
        )));
    }
    let resid = y - pred.mean;
    Ok(0.5 * pred.variance.ln() + resid * resid / (2.0 * pred.variance))
}
