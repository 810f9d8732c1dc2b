//! Visibility-degraded pairs and Poisson coincidence counting.
//!
//! An imperfect source emits
//! `ρ = V |ψ><ψ| + (1 - V)/2 (|HV><HV| + |VH><VH|)` with `ψ = α|HH> + β|VV>`,
//! and local rotations act on `ρ` afterwards.

use nalgebra::{Matrix2, Vector2};
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::jones::{linear_polarizer, Jones, C64};
use super::pair::BenchSettings;
use super::path::{CALIBRATION_POWERS, PUMP_COEFFICIENTS};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, stream_rng, Execution};

/// Source imperfection and counting parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub visibility: f64,
    pub pump_coefficients: [f64; 2],
    /// Pump power per branch in watts.
    pub pump_powers: [f64; 2],
    /// Counts per second per (coefficient * watt).
    pub rate_scale: f64,
    /// Integration time in seconds.
    pub integration_time: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            visibility: 1.0,
            pump_coefficients: PUMP_COEFFICIENTS,
            pump_powers: CALIBRATION_POWERS,
            rate_scale: 1000.0,
            integration_time: 1.0,
        }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(Error::InvalidBackendParams(format!(
                "visibility {} outside [0, 1]",
                self.visibility
            )));
        }
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !self.pump_powers.iter().all(|&p| nonneg(p))
            || !self.pump_coefficients.iter().all(|&c| nonneg(c))
            || !nonneg(self.rate_scale)
            || !nonneg(self.integration_time)
        {
            return Err(Error::InvalidBackendParams(
                "pump powers, coefficients, rate and time must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Coincidence rate of `branch` in counts per second.
    pub fn branch_rate(&self, branch: usize) -> f64 {
        self.rate_scale * self.pump_coefficients[branch] * self.pump_powers[branch]
    }

    /// Expected total coincidences of `branch` over the integration time.
    pub fn expected_counts(&self, branch: usize) -> f64 {
        self.branch_rate(branch) * self.integration_time
    }
}

/// A pair source followed by local rotations, with finite visibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedPair {
    pub alpha: C64,
    pub beta: C64,
    pub ua: Jones,
    pub ub: Jones,
    pub visibility: f64,
}

impl MixedPair {
    /// `(|HH> + |VV>)/√2` without rotations.
    pub fn bell(visibility: f64) -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        MixedPair {
            alpha: h,
            beta: h,
            ua: Jones::identity(),
            ub: Jones::identity(),
            visibility,
        }
    }

    pub fn from_bench(bench: &BenchSettings, visibility: f64) -> Self {
        MixedPair {
            alpha: C64::new(bench.alpha, 0.0),
            beta: C64::from_polar(bench.beta, bench.phase),
            ua: bench.unitary_a.matrix(),
            ub: bench.unitary_b.matrix(),
            visibility,
        }
    }

    /// `tr((|a><a| ⊗ |b><b|) ρ')` for analyzer states `a`, `b`.
    pub fn projector_probability(&self, a: &Vector2<C64>, b: &Vector2<C64>) -> f64 {
        let ea = self.ua.adjoint() * a;
        let eb = self.ub.adjoint() * b;
        // <a|U_A|x> = conj(ea[x])
        let pure = (ea[0].conj() * eb[0].conj() * self.alpha
            + ea[1].conj() * eb[1].conj() * self.beta)
            .norm_sqr();
        let mixed = ea[0].norm_sqr() * eb[1].norm_sqr() + ea[1].norm_sqr() * eb[0].norm_sqr();
        self.visibility * pure + 0.5 * (1.0 - self.visibility) * mixed
    }

    /// Probabilities of `HH, HV, VH, VV`.
    pub fn basis_probabilities(&self) -> [f64; 4] {
        let h = Vector2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        let v = Vector2::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        [
            self.projector_probability(&h, &h),
            self.projector_probability(&h, &v),
            self.projector_probability(&v, &h),
            self.projector_probability(&v, &v),
        ]
    }
}

/// Basis probabilities of a real amplitude vector prepared block-wise on
/// pairs with visibility `visibility`.
///
/// The vector is zero-padded to a multiple of four; each block of four is one
/// pair branch weighted by its squared norm. The returned vector has the
/// padded length and sums to one.
pub fn noisy_probabilities(amplitudes: &[f64], visibility: f64) -> Vec<f64> {
    let padded = amplitudes.len().div_ceil(4) * 4;
    let mut out = vec![0.0; padded];
    for (b, chunk) in amplitudes.chunks(4).enumerate() {
        let mut block = [0.0; 4];
        block[..chunk.len()].copy_from_slice(chunk);
        let w: f64 = block.iter().map(|x| x * x).sum();
        if w <= 0.0 {
            continue;
        }
        let m = Matrix2::new(block[0], block[1], block[2], block[3]) / w.sqrt();
        let svd = m.svd(true, true);
        let u = svd.u.expect("svd u");
        let vt = svd.v_t.expect("svd v_t");
        for i in 0..2 {
            for j in 0..2 {
                let pure = m[(i, j)] * m[(i, j)];
                let mixed = (u[(i, 0)] * vt[(1, j)]).powi(2) + (u[(i, 1)] * vt[(0, j)]).powi(2);
                out[4 * b + 2 * i + j] = w * (visibility * pure + 0.5 * (1.0 - visibility) * mixed);
            }
        }
    }
    out
}

/// Poisson counts with the given means.
pub fn poisson_counts<R: Rng + ?Sized>(means: &[f64], rng: &mut R) -> Vec<u64> {
    means
        .iter()
        .map(|&m| {
            if m > 0.0 {
                Poisson::new(m).expect("positive mean").sample(rng) as u64
            } else {
                0
            }
        })
        .collect()
}

/// Coincidence counts of `pair` for each analyzer angle pair `(θ_A, θ_B)`,
/// using the rate of `branch`.
pub fn coincidence_counts<R: Rng + ?Sized>(
    pair: &MixedPair,
    projector_angles: &[(f64, f64)],
    noise: &NoiseModel,
    branch: usize,
    rng: &mut R,
) -> Result<Vec<u64>> {
    noise.validate()?;
    let total = noise.expected_counts(branch);
    let means: Vec<f64> = projector_angles
        .iter()
        .map(|&(ta, tb)| {
            total * pair.projector_probability(&linear_polarizer(ta), &linear_polarizer(tb))
        })
        .collect();
    Ok(poisson_counts(&means, rng))
}

/// Amplitude magnitudes `√(c_i / Σc)`.
pub fn estimate_amplitudes(counts: &[u64]) -> Result<Vec<f64>> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::NoEvents);
    }
    Ok(counts
        .iter()
        .map(|&c| (c as f64 / total as f64).sqrt())
        .collect())
}

/// One point of a polarization correlation curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    /// Signal analyzer angle in radians.
    pub theta1: f64,
    pub counts: u64,
}

/// Coincidences against the signal analyzer angle with the idler analyzer
/// held at `theta2`. Point `i` draws from its own random stream.
pub fn correlation_curve(
    pair: &MixedPair,
    theta2: f64,
    theta1_sweep: &[f64],
    noise: &NoiseModel,
    branch: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<CurvePoint>> {
    noise.validate()?;
    let total = noise.expected_counts(branch);
    let analyzer_b = linear_polarizer(theta2);
    Ok(map_indexed(exec, 0..theta1_sweep.len(), |i| {
        let theta1 = theta1_sweep[i];
        let mean = total * pair.projector_probability(&linear_polarizer(theta1), &analyzer_b);
        let mut rng = stream_rng(seed, i as u64);
        CurvePoint {
            theta1,
            counts: poisson_counts(&[mean], &mut rng)[0],
        }
    }))
}

/// `(C_max - C_min)/(C_max + C_min)` over the curve.
pub fn visibility(counts: &[u64]) -> Result<f64> {
    let max = counts.iter().copied().max().unwrap_or(0);
    let min = counts.iter().copied().min().unwrap_or(0);
    if max == 0 {
        return Err(Error::AllZeroCounts);
    }
    Ok((max - min) as f64 / (max + min) as f64)
}

/// `angle_deg,counts` table of a curve.
pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("angle_deg,counts\n");
    for p in points {
        // undo radian round-off so grid angles print as written
        let deg = (p.theta1.to_degrees() * 1e9).round() / 1e9;
        out.push_str(&format!("{deg},{}\n", p.counts));
    }
    out
}

/// Analyzer angles from 0 to 180 degrees inclusive in `step_deg` increments.
pub fn degree_sweep(step_deg: f64) -> Vec<f64> {
    let n = (180.0 / step_deg).round() as usize;
    (0..=n)
        .map(|i| (i as f64 * step_deg).to_radians())
        .collect()
}
