//! Optical realization: wave-plate compilation, path encoding, and a
//! visibility-limited coincidence-count model.

pub mod counts;
pub mod jones;
pub mod pair;
pub mod path;

pub use counts::{
    coincidence_counts, correlation_curve, curve_csv, degree_sweep, estimate_amplitudes,
    noisy_probabilities, visibility, CurvePoint, MixedPair, NoiseModel,
};
pub use jones::{hwp_jones, linear_polarizer, qwp_jones, unitarity_error, Jones, C64};
pub use pair::{waveplate_decompose, BenchSettings, Su2, TwoQubitState};
pub use path::{
    compile_path_state, prepare_path_state, PathCompilation, PathEncodedState, PumpSplit,
    CALIBRATION_POWERS, PUMP_COEFFICIENTS,
};
