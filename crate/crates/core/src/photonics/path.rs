//! The three-qubit state carried by two photon pairs and a path qubit.
//!
//! A pump beam is split by a half-wave plate and a polarizing beam splitter
//! into two branches, each driving its own pair source. Branch `j` produces
//! coincidences at a rate `coefficient_j * power_j`, which fixes the path
//! amplitudes `α'` and `β'`.

use super::jones::C64;
use super::pair::{waveplate_decompose, BenchSettings, TwoQubitState};
use crate::error::{Error, Result};

/// Count-rate slope of each pair source, in counts per second per watt
/// (before the configurable base-rate scale).
pub const PUMP_COEFFICIENTS: [f64; 2] = [11.43, 11.91];

/// Pump powers used for the correlation-curve calibration, in watts.
pub const CALIBRATION_POWERS: [f64; 2] = [0.309, 0.425];

/// Half-wave plate in front of the pump beam splitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpSplit {
    /// Plate angle in radians; branch 1 receives `cos² 2θ` of the power.
    pub theta: f64,
    /// Total pump power in watts.
    pub total_power: f64,
    pub coefficients: [f64; 2],
}

impl PumpSplit {
    pub fn new(theta: f64, total_power: f64) -> Self {
        PumpSplit {
            theta,
            total_power,
            coefficients: PUMP_COEFFICIENTS,
        }
    }

    /// Pump power delivered to each branch.
    pub fn powers(&self) -> [f64; 2] {
        let c = (2.0 * self.theta).cos();
        let f = c * c;
        [self.total_power * f, self.total_power * (1.0 - f)]
    }

    /// Coincidence rate of each branch, `coefficient * power`.
    pub fn rates(&self) -> [f64; 2] {
        let p = self.powers();
        [self.coefficients[0] * p[0], self.coefficients[1] * p[1]]
    }

    /// Path amplitudes `(α', β')` with `α'² + β'² = 1`.
    pub fn path_amplitudes(&self) -> (f64, f64) {
        let [c1, c2] = self.rates();
        let total = c1 + c2;
        if total <= 0.0 {
            return (0.0, 0.0);
        }
        ((c1 / total).sqrt(), (c2 / total).sqrt())
    }

    /// Plate angle that sends weight `w1` to branch 1 and `w2` to branch 2.
    pub fn for_weights(w1: f64, w2: f64, total_power: f64) -> Self {
        let [k1, k2] = PUMP_COEFFICIENTS;
        let theta = 0.5 * (k1 * w2).sqrt().atan2((k2 * w1).sqrt());
        PumpSplit::new(theta, total_power)
    }
}

/// `α'(a, b, c, d) ⊕ β'(a', b', c', d')` over
/// `{HH, HV, VH, VV}` of pair 1 followed by the same basis of pair 2.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEncodedState {
    pub p: [C64; 8],
    pub alpha_prime: f64,
    pub beta_prime: f64,
}

impl PathEncodedState {
    pub fn norm_sqr(&self) -> f64 {
        self.p.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Probabilities of the eight pair projectors.
    pub fn probabilities(&self) -> [f64; 8] {
        self.p.map(|z| z.norm_sqr())
    }

    /// Normalized pair state carried by `branch` (0 or 1), if populated.
    pub fn branch_state(&self, branch: usize) -> Option<TwoQubitState> {
        let block = &self.p[4 * branch..4 * branch + 4];
        let w: f64 = block.iter().map(|z| z.norm_sqr()).sum();
        if w <= 0.0 {
            return None;
        }
        let s = C64::new(w.sqrt(), 0.0);
        Some(TwoQubitState {
            a: block[0] / s,
            b: block[1] / s,
            c: block[2] / s,
            d: block[3] / s,
        })
    }
}

/// Composes the two pair states behind a pump split.
pub fn prepare_path_state(
    bench1: &BenchSettings,
    bench2: &BenchSettings,
    split: &PumpSplit,
) -> PathEncodedState {
    let (ap, bp) = split.path_amplitudes();
    let s1 = bench1.reconstruct().coefficients();
    let s2 = bench2.reconstruct().coefficients();
    let mut p = [C64::new(0.0, 0.0); 8];
    for i in 0..4 {
        p[i] = s1[i] * ap;
        p[4 + i] = s2[i] * bp;
    }
    PathEncodedState {
        p,
        alpha_prime: ap,
        beta_prime: bp,
    }
}

/// Bench configuration realizing a target path-encoded amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PathCompilation {
    pub split: PumpSplit,
    /// Settings per branch; `None` for an empty branch.
    pub benches: [Option<BenchSettings>; 2],
}

/// Compiles eight real or complex amplitudes onto the two-branch bench.
///
/// Each populated branch must itself be admissible for
/// [`waveplate_decompose`].
pub fn compile_path_state(target: &[C64], total_power: f64) -> Result<PathCompilation> {
    if target.len() != 8 {
        return Err(Error::DimensionMismatch(format!(
            "path-encoded state needs 8 amplitudes, got {}",
            target.len()
        )));
    }
    let norm: f64 = target.iter().map(|z| z.norm_sqr()).sum();
    if norm <= 0.0 {
        return Err(Error::ZeroWindow);
    }
    let state = PathEncodedState {
        p: std::array::from_fn(|i| target[i] / norm.sqrt()),
        alpha_prime: 0.0,
        beta_prime: 0.0,
    };
    let w1: f64 = state.p[..4].iter().map(|z| z.norm_sqr()).sum();
    let w2 = 1.0 - w1;
    let mut benches = [None, None];
    for (b, slot) in benches.iter_mut().enumerate() {
        if let Some(pair) = state.branch_state(b) {
            *slot = Some(waveplate_decompose(&pair)?);
        }
    }
    Ok(PathCompilation {
        split: PumpSplit::for_weights(w1, w2.max(0.0), total_power),
        benches,
    })
}
