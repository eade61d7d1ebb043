//! Regression quality metrics for surge-distance predictions: R², RMSE,
//! maximum error, floored MAPE, and the ±threshold acceptance accuracy.
//!
//! All inputs are paired slices `(predictions, targets)`; every function
//! rejects empty or length-mismatched input. Percentages are returned in
//! `[0, 100]`. Metrics are meant to be computed on physical surge-distance
//! units (percent), never on normalized targets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default denominator floor (in percent of surge distance) for [`mape`] and
/// [`acceptance_accuracy`]: targets with magnitude below this are treated as
/// having this magnitude, so near-zero surge distances cannot blow up the
/// percentage error.
pub const DEFAULT_MAPE_FLOOR: f64 = 1.0;

/// Default acceptance threshold: a prediction is accepted when its floored
/// percentage error is at most ±4 %.
pub const DEFAULT_THRESHOLD_PCT: f64 = 4.0;

/// Knobs shared by the percentage-based metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsOptions {
    pub threshold_pct: f64,
    pub mape_floor: f64,
}

impl Default for MetricsOptions {
    fn default() -> MetricsOptions {
        MetricsOptions {
            threshold_pct: DEFAULT_THRESHOLD_PCT,
            mape_floor: DEFAULT_MAPE_FLOOR,
        }
    }
}

/// All scalar metrics over one evaluation set, together with the sample
/// count and the knobs they were computed under.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub r2: f64,
    pub rmse: f64,
    pub max_error: f64,
    pub mape_pct: f64,
    pub acceptance_accuracy_pct: f64,
    pub n: usize,
    pub threshold_pct: f64,
    pub mape_floor: f64,
}

fn check_pairs(predictions: &[f64], targets: &[f64]) -> Result<()> {
    if predictions.is_empty() {
        return Err(Error::InvalidArgument(
            "metrics require at least one sample".into(),
        ));
    }
    if predictions.len() != targets.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predictions but {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    Ok(())
}

fn check_floor(floor: f64) -> Result<()> {
    if floor.is_nan() || floor <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "mape floor must be positive, got {floor}"
        )));
    }
    Ok(())
}

/// Coefficient of determination `1 − SS_res / SS_tot`. Errors with
/// [`Error::DegenerateTarget`] when every target is identical (`SS_tot = 0`),
/// where R² is undefined.
pub fn r_squared(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    check_pairs(predictions, targets)?;
    let n = targets.len() as f64;
    let mean = targets.iter().sum::<f64>() / n;
    let ss_tot: f64 = targets.iter().map(|y| (y - mean) * (y - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::DegenerateTarget(
            "all targets are identical; R² is undefined".into(),
        ));
    }
    let ss_res: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, y)| (y - p) * (y - p))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Root mean squared error.
pub fn rmse(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    check_pairs(predictions, targets)?;
    let n = targets.len() as f64;
    let sse: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, y)| (y - p) * (y - p))
        .sum();
    Ok((sse / n).sqrt())
}

/// Largest absolute residual.
pub fn max_error(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    check_pairs(predictions, targets)?;
    Ok(predictions
        .iter()
        .zip(targets)
        .map(|(p, y)| (y - p).abs())
        .fold(0.0, f64::max))
}

/// Floored percentage error of one pair.
fn pct_error(prediction: f64, target: f64, floor: f64) -> f64 {
    100.0 * (target - prediction).abs() / target.abs().max(floor)
}

/// Mean absolute percentage error with a floored denominator:
/// `100 · mean(|y − ŷ| / max(|y|, floor))`. The floor (in the same percent
/// units as the surge distance) keeps the metric finite near SD = 0.
pub fn mape(predictions: &[f64], targets: &[f64], floor: f64) -> Result<f64> {
    check_pairs(predictions, targets)?;
    check_floor(floor)?;
    let n = targets.len() as f64;
    let sum: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, y)| pct_error(*p, *y, floor))
        .sum();
    Ok(sum / n)
}

/// Percentage of samples whose floored percentage error is within
/// `threshold_pct` (boundary inclusive).
pub fn acceptance_accuracy(
    predictions: &[f64],
    targets: &[f64],
    threshold_pct: f64,
    floor: f64,
) -> Result<f64> {
    check_pairs(predictions, targets)?;
    check_floor(floor)?;
    if threshold_pct.is_nan() || threshold_pct < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "acceptance threshold must be non-negative, got {threshold_pct}"
        )));
    }
    let hits = predictions
        .iter()
        .zip(targets)
        .filter(|(p, y)| pct_error(**p, **y, floor) <= threshold_pct)
        .count();
    Ok(100.0 * hits as f64 / targets.len() as f64)
}

/// Computes every metric over the pair of slices under one set of options.
pub fn metrics_report(
    predictions: &[f64],
    targets: &[f64],
    options: &MetricsOptions,
) -> Result<MetricsReport> {
    Ok(MetricsReport {
        r2: r_squared(predictions, targets)?,
        rmse: rmse(predictions, targets)?,
        max_error: max_error(predictions, targets)?,
        mape_pct: mape(predictions, targets, options.mape_floor)?,
        acceptance_accuracy_pct: acceptance_accuracy(
            predictions,
            targets,
            options.threshold_pct,
            options.mape_floor,
        )?,
        n: targets.len(),
        threshold_pct: options.threshold_pct,
        mape_floor: options.mape_floor,
    })
}
