//! Ground-truth series for the benchmark tasks.

pub mod mackey_glass;
pub mod narma;
pub mod ode;
pub mod standardize;
pub mod timer;

pub use mackey_glass::{mackey_glass, mackey_glass_rhs, MackeyGlass};
pub use narma::{narma_input, narma_series, narma_step};
pub use ode::{
    double_scroll, double_scroll_rhs, integrate, lorenz63, lorenz63_rhs, rk4_step, OdeGrid,
};
pub use standardize::{standardize, SeriesBundle};
pub use timer::{timer_series, TimerSeries};
