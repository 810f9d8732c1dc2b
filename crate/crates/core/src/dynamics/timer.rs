//! The timer task: after the input switches on at `k_start`, fire once
//! `tau` steps later.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TimerSeries {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

/// Step input `0 -> 1` at `k_start`, target `1` only at `k_start + tau`.
///
/// The firing step must lie inside the sequence.
pub fn timer_series(k_start: usize, tau: usize, length: usize) -> Result<TimerSeries> {
    let fire = k_start + tau;
    if fire >= length {
        return Err(Error::BadHorizon(format!(
            "firing step k_start + tau = {fire} is outside a sequence of length {length}"
        )));
    }
    let input = (0..length)
        .map(|k| if k >= k_start { 1.0 } else { 0.0 })
        .collect();
    let target = (0..length)
        .map(|k| if k == fire { 1.0 } else { 0.0 })
        .collect();
    Ok(TimerSeries { input, target })
}
