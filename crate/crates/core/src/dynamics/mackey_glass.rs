//! Mackey-Glass delay differential equation
//! `ẏ = 0.2 y(t-τ) / (1 + y(t-τ)^10) - 0.1 y`.

use crate::error::{Error, Result};

pub fn mackey_glass_rhs(y: f64, delayed: f64) -> f64 {
    0.2 * delayed / (1.0 + delayed.powi(10)) - 0.1 * y
}

/// Integration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MackeyGlass {
    pub dt: f64,
    pub tau: f64,
    pub sample_every: usize,
    /// Constant history on `[-τ, 0]`.
    pub init: f64,
    /// Emitted samples to discard before recording.
    pub transient: usize,
}

impl Default for MackeyGlass {
    fn default() -> Self {
        MackeyGlass {
            dt: 0.1,
            tau: 17.0,
            sample_every: 10,
            init: 1.2,
            transient: 0,
        }
    }
}

impl MackeyGlass {
    /// Delay in integration steps.
    pub fn lag(&self) -> Result<usize> {
        let ratio = self.tau / self.dt;
        let lag = ratio.round();
        if self.dt.is_nan()
            || self.dt <= 0.0
            || lag < 1.0
            || (ratio - lag).abs() > 1e-9 * ratio.max(1.0)
        {
            return Err(Error::BadDelayGrid {
                tau: self.tau,
                dt: self.dt,
            });
        }
        Ok(lag as usize)
    }
}

/// `steps` samples of the series. RK4 with the delayed value at half steps
/// taken by linear interpolation of the history buffer.
pub fn mackey_glass(params: &MackeyGlass, steps: usize) -> Result<Vec<f64>> {
    let lag = params.lag()?;
    if params.sample_every == 0 {
        return Err(Error::InvalidConfig("sample_every must be >= 1".into()));
    }
    let dt = params.dt;
    // ring of the last lag + 1 values; hist[head] is y(t - τ)
    let mut hist = vec![params.init; lag + 1];
    let mut head = 0usize;
    let mut y = params.init;
    let mut out = Vec::with_capacity(steps);
    let total = (params.transient + steps) * params.sample_every;
    for i in 0..total {
        if i % params.sample_every == 0 && i / params.sample_every >= params.transient {
            out.push(y);
        }
        let d0 = hist[head];
        let d1 = hist[(head + 1) % (lag + 1)];
        let dm = 0.5 * (d0 + d1);
        let k1 = mackey_glass_rhs(y, d0);
        let k2 = mackey_glass_rhs(y + dt / 2.0 * k1, dm);
        let k3 = mackey_glass_rhs(y + dt / 2.0 * k2, dm);
        let k4 = mackey_glass_rhs(y + dt * k3, d1);
        y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !y.is_finite() {
            return Err(Error::Overflow { step: i });
        }
        hist[head] = y;
        head = (head + 1) % (lag + 1);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_points() {
        for init in [0.0, 1.0] {
            let p = MackeyGlass {
                init,
                ..MackeyGlass::default()
            };
            let s = mackey_glass(&p, 200).unwrap();
            assert!(s.iter().all(|&v| (v - init).abs() < 1e-14));
        }
    }

    #[test]
    fn delay_must_fit_grid() {
        let p = MackeyGlass {
            tau: 17.05,
            ..MackeyGlass::default()
        };
        assert!(matches!(
            mackey_glass(&p, 10),
            Err(Error::BadDelayGrid { .. })
        ));
        let p = MackeyGlass {
            tau: 0.05,
            ..MackeyGlass::default()
        };
        assert!(matches!(
            mackey_glass(&p, 10),
            Err(Error::BadDelayGrid { .. })
        ));
    }

    #[test]
    fn stays_positive_and_bounded() {
        let s = mackey_glass(
            &MackeyGlass {
                transient: 100,
                ..MackeyGlass::default()
            },
            2000,
        )
        .unwrap();
        assert!(s.iter().all(|&v| v > 0.0 && v < 2.0));
    }
}
