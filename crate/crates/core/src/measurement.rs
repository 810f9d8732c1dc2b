//! Linear and nonlinear measurement signals and feature assembly.
//!
//! The linear signal of basis state `i` is `√<λ_i>`; the nonlinear signal of
//! a sorted multiset `m` is the square root of the probability of the
//! ordered outcome `m` on `S` independent copies. Stochastic backends
//! estimate both from counts.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};

use crate::encoding::{enumerate_multisets, FeatureConfig, LinearFeatureState, MultisetIndex};
use crate::error::{Error, Result};
use crate::photonics::noisy_probabilities;

/// What a stochastic backend does with amplitude signs, which counting
/// cannot observe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignMode {
    /// Reattach the sign of the encoded amplitude (or amplitude product).
    #[default]
    Restore,
    /// Report magnitudes only.
    Drop,
}

impl SignMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SignMode::Restore => "restore",
            SignMode::Drop => "drop",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "restore" => Some(SignMode::Restore),
            "drop" => Some(SignMode::Drop),
            _ => None,
        }
    }
}

/// Measurement backend.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum MeasurementModel {
    /// Exact amplitudes, signs kept.
    #[default]
    IdealSigned,
    /// Exact `√p`, signs dropped.
    IdealMagnitude,
    /// `shots` samples per state.
    Shots { shots: u64, signs: SignMode },
    /// Visibility-limited pairs with Poisson-distributed event totals of
    /// mean `rate * time`.
    Photonic {
        visibility: f64,
        rate: f64,
        time: f64,
        signs: SignMode,
    },
}

impl MeasurementModel {
    pub fn name(&self) -> &'static str {
        match self {
            MeasurementModel::IdealSigned => "ideal-signed",
            MeasurementModel::IdealMagnitude => "ideal-magnitude",
            MeasurementModel::Shots { .. } => "shots",
            MeasurementModel::Photonic { .. } => "photonic",
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(
            self,
            MeasurementModel::Shots { .. } | MeasurementModel::Photonic { .. }
        )
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            MeasurementModel::Shots { shots: 0, .. } => {
                Err(Error::InvalidBackendParams("shots must be >= 1".into()))
            }
            MeasurementModel::Photonic {
                visibility,
                rate,
                time,
                ..
            } => {
                if !(0.0..=1.0).contains(&visibility) {
                    return Err(Error::InvalidBackendParams(format!(
                        "visibility {visibility} outside [0, 1]"
                    )));
                }
                if !(rate.is_finite() && rate >= 0.0 && time.is_finite() && time >= 0.0) {
                    return Err(Error::InvalidBackendParams(
                        "photonic rate and time must be finite and non-negative".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Raw measurement signals of one state.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub s: Vec<f64>,
    pub r: Vec<f64>,
    pub norm_factor: f64,
}

fn sign_of(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Counts of the listed categories in a multinomial draw of `n` trials.
///
/// `probs` need not sum to one; the remaining mass is an unlisted
/// catch-all category. Sampled as a chain of conditional binomials.
pub fn multinomial_subset<R: Rng + ?Sized>(n: u64, probs: &[f64], rng: &mut R) -> Vec<u64> {
    let mut out = vec![0u64; probs.len()];
    let mut remaining = n;
    let mut mass = 1.0f64;
    for (slot, &p) in out.iter_mut().zip(probs) {
        if remaining == 0 {
            break;
        }
        if p <= 0.0 {
            continue;
        }
        let q = if mass > 0.0 {
            (p / mass).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let c = Binomial::new(remaining, q)
            .expect("valid binomial")
            .sample(rng);
        *slot = c;
        remaining -= c;
        mass -= p;
    }
    out
}

fn poisson_total<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean > 0.0 {
        Poisson::new(mean).expect("positive mean").sample(rng) as u64
    } else {
        0
    }
}

fn estimates(counts: &[u64], total: u64, signs: Option<&[f64]>) -> Vec<f64> {
    counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let m = (c as f64 / total as f64).sqrt();
            signs.map_or(m, |s| m * s[i])
        })
        .collect()
}

/// Linear signals `s`.
pub fn measure_linear<R: Rng + ?Sized>(
    state: &LinearFeatureState,
    model: &MeasurementModel,
    rng: &mut R,
) -> Result<Vec<f64>> {
    model.validate()?;
    let a = state.amplitudes();
    let signs: Vec<f64> = a.iter().map(|&v| sign_of(v)).collect();
    match *model {
        MeasurementModel::IdealSigned => Ok(a.to_vec()),
        MeasurementModel::IdealMagnitude => Ok(a.iter().map(|v| v.abs()).collect()),
        MeasurementModel::Shots { shots, signs: mode } => {
            let counts = multinomial_subset(shots, &state.probabilities(), rng);
            Ok(estimates(
                &counts,
                shots,
                (mode == SignMode::Restore).then_some(&signs[..]),
            ))
        }
        MeasurementModel::Photonic {
            visibility,
            rate,
            time,
            signs: mode,
        } => {
            let p = noisy_probabilities(a, visibility);
            let total = poisson_total(rate * time, rng);
            if total == 0 {
                return Err(Error::NoEvents);
            }
            let counts = multinomial_subset(total, &p[..a.len()], rng);
            Ok(estimates(
                &counts,
                total,
                (mode == SignMode::Restore).then_some(&signs[..]),
            ))
        }
    }
}

/// Nonlinear signals `r`, one per multiset.
pub fn measure_nonlinear<R: Rng + ?Sized>(
    state: &LinearFeatureState,
    multisets: &[MultisetIndex],
    model: &MeasurementModel,
    rng: &mut R,
) -> Result<Vec<f64>> {
    model.validate()?;
    let a = state.amplitudes();
    let signs = || -> Vec<f64> { multisets.iter().map(|m| sign_of(m.product(a))).collect() };
    let sampled = |probs: &[f64], total: u64, mode: SignMode, rng: &mut R| {
        let ordered: Vec<f64> = multisets.iter().map(|m| m.product(probs)).collect();
        let counts = multinomial_subset(total, &ordered, rng);
        let s = (mode == SignMode::Restore).then(signs);
        estimates(&counts, total, s.as_deref())
    };
    match *model {
        MeasurementModel::IdealSigned => Ok(multisets.iter().map(|m| m.product(a)).collect()),
        MeasurementModel::IdealMagnitude => {
            Ok(multisets.iter().map(|m| m.product(a).abs()).collect())
        }
        MeasurementModel::Shots { shots, signs: mode } => {
            Ok(sampled(&state.probabilities(), shots, mode, rng))
        }
        MeasurementModel::Photonic {
            visibility,
            rate,
            time,
            signs: mode,
        } => {
            let p = noisy_probabilities(a, visibility);
            let total = poisson_total(rate * time, rng);
            if total == 0 {
                return Err(Error::NoEvents);
            }
            Ok(sampled(&p, total, mode, rng))
        }
    }
}

/// `[1, √N s, N^{S/2} r]`.
pub fn assemble_feature_vector(out: &MeasurementOutcome, cfg: &FeatureConfig) -> Vec<f64> {
    let root = out.norm_factor.sqrt();
    let scale_r = root.powi(cfg.order as i32);
    let mut v = Vec::with_capacity(1 + out.s.len() + out.r.len());
    v.push(1.0);
    v.extend(out.s.iter().map(|x| x * root));
    v.extend(out.r.iter().map(|x| x * scale_r));
    v
}

/// Turns raw windows into feature vectors under one backend.
#[derive(Debug, Clone)]
pub struct Featurizer {
    cfg: FeatureConfig,
    model: MeasurementModel,
    multisets: Vec<MultisetIndex>,
}

impl Featurizer {
    pub fn new(cfg: FeatureConfig, model: MeasurementModel) -> Result<Self> {
        cfg.validate()?;
        model.validate()?;
        let multisets = if cfg.order == 0 {
            Vec::new()
        } else {
            enumerate_multisets(cfg.linear_len(), cfg.order)
        };
        Ok(Featurizer {
            cfg,
            model,
            multisets,
        })
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.cfg
    }

    pub fn model(&self) -> &MeasurementModel {
        &self.model
    }

    pub fn multisets(&self) -> &[MultisetIndex] {
        &self.multisets
    }

    pub fn measure<R: Rng + ?Sized>(
        &self,
        state: &LinearFeatureState,
        rng: &mut R,
    ) -> Result<MeasurementOutcome> {
        let s = measure_linear(state, &self.model, rng)?;
        let r = if self.multisets.is_empty() {
            Vec::new()
        } else {
            measure_nonlinear(state, &self.multisets, &self.model, rng)?
        };
        Ok(MeasurementOutcome {
            s,
            r,
            norm_factor: state.norm_factor(),
        })
    }

    /// Feature vector of a raw concatenated window. An all-zero window
    /// yields the constant entry followed by zeros.
    pub fn features<R: Rng + ?Sized>(&self, window: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        if window.len() != self.cfg.linear_len() {
            return Err(Error::DimensionMismatch(format!(
                "window has {} entries, configuration needs {}",
                window.len(),
                self.cfg.linear_len()
            )));
        }
        let state = match LinearFeatureState::from_window(window) {
            Ok(s) => s,
            Err(Error::ZeroWindow) => {
                let mut v = vec![0.0; self.cfg.feature_len()];
                v[0] = 1.0;
                return Ok(v);
            }
            Err(e) => return Err(e),
        };
        let out = self.measure(&state, rng)?;
        Ok(assemble_feature_vector(&out, &self.cfg))
    }
}
