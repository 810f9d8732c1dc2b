//! Quantum next-generation reservoir computing.
//!
//! Delay windows of a time series are encoded as normalized state
//! amplitudes, measured in the computational basis (optionally on several
//! copies), rescaled, and mapped to forecasts by a linear least-squares
//! readout.

pub mod dynamics;
pub mod encoding;
pub mod error;
pub mod exec;
pub mod manifest;
pub mod measurement;
pub mod metrics;
pub mod photonics;
pub mod pipeline;
pub mod readout;
pub mod suite;
pub mod sweep;

pub use encoding::{FeatureConfig, LinearFeatureState, MultisetIndex, TargetMode};
pub use error::{Error, ErrorClass, Result};
pub use exec::Execution;
pub use manifest::{RunManifest, TaskKind};
pub use measurement::{Featurizer, MeasurementModel, MeasurementOutcome, SignMode};
pub use pipeline::{run, RunOutput};
pub use readout::{ReadoutWeights, Solver};
