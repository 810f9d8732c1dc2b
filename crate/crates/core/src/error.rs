use thiserror::Error;

/// Errors raised by the simulator.
///
/// Every variant carries a stable module-qualified code (see [`Error::code`]) so
/// that runners can report failures without parsing messages.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("delay window is identically zero and cannot be encoded as a state")]
    ZeroWindow,
    #[error("tensor power has {len} amplitudes, above the cap of {cap}")]
    CapExceeded { len: u128, cap: usize },

    #[error("invalid measurement backend parameters: {0}")]
    InvalidBackendParams(String),
    #[error("no detection events were recorded; amplitudes cannot be estimated")]
    NoEvents,

    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("Gram matrix is numerically singular (condition estimate {condition:.3e}); use a positive ridge")]
    SingularGram { condition: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("forecast produced a non-finite value at step {step}")]
    NonFinite { step: usize },

    #[error("bad horizon: {0}")]
    BadHorizon(String),
    #[error("insufficient history: order {order} needs {needed} past values, got {got}")]
    InsufficientHistory {
        order: usize,
        needed: usize,
        got: usize,
    },
    #[error("delay {tau} is not an integer multiple (>= 1) of the step {dt}")]
    BadDelayGrid { tau: f64, dt: f64 },
    #[error("sinh argument overflow at integration step {step}")]
    Overflow { step: usize },
    #[error("component {component} has zero variance on the normalization range")]
    DegenerateComponent { component: usize },

    #[error("target component {component} has zero variance over the evaluation horizon")]
    ZeroVariance { component: usize },

    #[error("waveplate decomposition is singular: {0}")]
    SingularDecomposition(String),
    #[error("correlation curve has no counts")]
    AllZeroCounts,
}

/// Broad failure class, used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numerical,
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "encoding.invalid_config",
            Error::ZeroWindow => "encoding.zero_window",
            Error::CapExceeded { .. } => "encoding.cap_exceeded",
            Error::InvalidBackendParams(_) => "measurement.invalid_backend_params",
            Error::NoEvents => "measurement.no_events",
            Error::InsufficientData(_) => "readout.insufficient_data",
            Error::SingularGram { .. } => "readout.singular_gram",
            Error::DimensionMismatch(_) => "readout.dimension_mismatch",
            Error::NonFinite { .. } => "readout.non_finite",
            Error::BadHorizon(_) => "dynamics.bad_horizon",
            Error::InsufficientHistory { .. } => "dynamics.insufficient_history",
            Error::BadDelayGrid { .. } => "dynamics.bad_delay_grid",
            Error::Overflow { .. } => "dynamics.overflow",
            Error::DegenerateComponent { .. } => "dynamics.degenerate_component",
            Error::ZeroVariance { .. } => "metrics.zero_variance",
            Error::SingularDecomposition(_) => "photonics.singular_decomposition",
            Error::AllZeroCounts => "photonics.all_zero_counts",
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidConfig(_) | Error::InvalidBackendParams(_) => ErrorClass::Usage,
            Error::SingularGram { .. }
            | Error::NonFinite { .. }
            | Error::Overflow { .. }
            | Error::SingularDecomposition(_) => ErrorClass::Numerical,
            _ => ErrorClass::Data,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
