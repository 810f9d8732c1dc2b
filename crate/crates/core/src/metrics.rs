//! Forecast quality measures.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// NRMSE denominator, as reported next to the numbers.
pub const NRMSE_DEFINITION: &str =
    "sqrt(mean((pred - target)^2)) / std(target), per component over the evaluation horizon";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub nrmse: Vec<f64>,
    pub horizon: usize,
    pub accuracy: Option<f64>,
    pub valid_time: Option<usize>,
    /// Teacher-forced one-step NRMSE over the same horizon (autonomous tasks).
    pub one_step_nrmse: Option<Vec<f64>>,
}

fn check_horizon(pred: &DMatrix<f64>, target: &DMatrix<f64>, horizon: usize) -> Result<()> {
    if pred.nrows() != target.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "prediction has {} components, target has {}",
            pred.nrows(),
            target.nrows()
        )));
    }
    if horizon == 0 || horizon > pred.ncols().min(target.ncols()) {
        return Err(Error::BadHorizon(format!(
            "horizon {horizon} with {} predicted and {} target samples",
            pred.ncols(),
            target.ncols()
        )));
    }
    Ok(())
}

/// Per-component RMSE over the first `horizon` steps divided by the
/// population standard deviation of the target over the same steps.
pub fn nrmse(pred: &DMatrix<f64>, target: &DMatrix<f64>, horizon: usize) -> Result<Vec<f64>> {
    check_horizon(pred, target, horizon)?;
    let n = horizon as f64;
    (0..target.nrows())
        .map(|i| {
            let t = target.row(i).columns(0, horizon).into_owned();
            let p = pred.row(i).columns(0, horizon).into_owned();
            let mean = t.sum() / n;
            let var = t.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            if var.is_nan() || var <= 0.0 {
                return Err(Error::ZeroVariance { component: i });
            }
            let mse = (p - t).iter().map(|e| e * e).sum::<f64>() / n;
            Ok((mse / var).sqrt())
        })
        .collect()
}

/// Fraction of steps where the 0.5-thresholded prediction equals the target.
pub fn timer_accuracy(pred: &[f64], target: &[f64]) -> f64 {
    let n = pred.len().min(target.len());
    if n == 0 {
        return 0.0;
    }
    let hits = pred
        .iter()
        .zip(target)
        .filter(|(p, t)| (**p >= 0.5) == (**t >= 0.5))
        .count();
    hits as f64 / n as f64
}

/// First step at which any component error exceeds `threshold`, or `None`
/// if the whole horizon stays within it.
pub fn valid_time(
    pred: &DMatrix<f64>,
    target: &DMatrix<f64>,
    horizon: usize,
    threshold: f64,
) -> Result<Option<usize>> {
    check_horizon(pred, target, horizon)?;
    Ok((0..horizon)
        .find(|&k| (0..pred.nrows()).any(|i| (pred[(i, k)] - target[(i, k)]).abs() > threshold)))
}
