//! NARMA benchmark systems driven by a product of three sines.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `x_k = 0.1 [sin(2π·2.11k/100) sin(2π·3.73k/100) sin(2π·4.11k/100) + 1]`.
pub fn narma_input(k: usize) -> f64 {
    let t = k as f64 / 100.0;
    let s = (2.0 * PI * 2.11 * t).sin() * (2.0 * PI * 3.73 * t).sin() * (2.0 * PI * 4.11 * t).sin();
    0.1 * (s + 1.0)
}

/// One step of NARMA of the given order; `y` and `x` end with `y_k`, `x_k`.
///
/// Order 2 is `0.4 y_k + 0.4 y_k y_{k-1} + 0.6 x_k³ + 0.1`. Order `n`
/// is `0.3 y_k + 0.05 y_k Σ_{j<n} y_{k-j} + 1.5 x_{k-n+1} x_k + 0.1`.
pub fn narma_step(order: usize, y: &[f64], x: &[f64]) -> Result<f64> {
    if order < 2 {
        return Err(Error::InvalidConfig(format!(
            "NARMA order must be >= 2, got {order}"
        )));
    }
    let (needed_y, needed_x) = if order == 2 { (2, 1) } else { (order, order) };
    if y.len() < needed_y || x.len() < needed_x {
        return Err(Error::InsufficientHistory {
            order,
            needed: needed_y.max(needed_x),
            got: y.len().min(x.len()),
        });
    }
    let yk = y[y.len() - 1];
    let xk = x[x.len() - 1];
    if order == 2 {
        let yk1 = y[y.len() - 2];
        return Ok(0.4 * yk + 0.4 * yk * yk1 + 0.6 * xk.powi(3) + 0.1);
    }
    let sum: f64 = y[y.len() - order..].iter().sum();
    let x_lag = x[x.len() - order];
    Ok(0.3 * yk + 0.05 * yk * sum + 1.5 * x_lag * xk + 0.1)
}

/// Input and output of NARMA of the given order over `length` steps,
/// starting from `y_0 = 0` with zero history before the first step.
pub fn narma_series(order: usize, length: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let pad = order.max(2);
    let mut x = vec![0.0; pad];
    let mut y = vec![0.0; pad + 1];
    x.extend((0..length).map(narma_input));
    for k in 0..length.saturating_sub(1) {
        let next = narma_step(order, &y[..pad + k + 1], &x[..pad + k + 1])?;
        if !next.is_finite() {
            return Err(Error::Overflow { step: k });
        }
        y.push(next);
    }
    let x = x.split_off(pad);
    let y = y.split_off(pad);
    Ok((x, y))
}
