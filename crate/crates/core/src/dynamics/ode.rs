//! Fixed-step RK4 for the Lorenz63 and double-scroll systems.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub type State3 = [f64; 3];

/// Lorenz63 with σ = 10, ρ = 28, β = 8/3.
pub fn lorenz63_rhs(x: &State3) -> State3 {
    [
        10.0 * (x[1] - x[0]),
        x[0] * (28.0 - x[2]) - x[1],
        x[0] * x[1] - 8.0 * x[2] / 3.0,
    ]
}

const DS: [f64; 5] = [1.2, 3.44, 0.193, 11.6, 2.25e-5];

/// Largest `|D4 (x1 - x2)|` for which `sinh` is evaluated.
pub const SINH_LIMIT: f64 = 700.0;

/// Double-scroll circuit, or `None` when the `sinh` argument exceeds
/// [`SINH_LIMIT`].
pub fn double_scroll_rhs(x: &State3) -> Option<State3> {
    let [d1, d2, d3, d4, d5] = DS;
    let dx = x[0] - x[1];
    if (d4 * dx).abs() > SINH_LIMIT || !dx.is_finite() {
        return None;
    }
    let g = dx / d2 + 2.0 * d5 * (d4 * dx).sinh();
    Some([x[0] / d1 - g, g - x[2], x[1] - d3 * x[2]])
}

fn axpy(x: &State3, h: f64, k: &State3) -> State3 {
    [x[0] + h * k[0], x[1] + h * k[1], x[2] + h * k[2]]
}

/// One classical Runge-Kutta step; `None` if the vector field fails.
pub fn rk4_step<F>(f: &F, x: &State3, dt: f64) -> Option<State3>
where
    F: Fn(&State3) -> Option<State3>,
{
    let k1 = f(x)?;
    let k2 = f(&axpy(x, dt / 2.0, &k1))?;
    let k3 = f(&axpy(x, dt / 2.0, &k2))?;
    let k4 = f(&axpy(x, dt, &k3))?;
    Some(std::array::from_fn(|i| {
        x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    }))
}

/// Integration grid: step `dt`, keep every `sample_every`-th state, drop
/// the first `transient` kept samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeGrid {
    pub dt: f64,
    pub sample_every: usize,
    pub transient: usize,
}

impl OdeGrid {
    pub fn new(dt: f64) -> Self {
        OdeGrid {
            dt,
            sample_every: 1,
            transient: 0,
        }
    }

    /// Time between emitted samples.
    pub fn spacing(&self) -> f64 {
        self.dt * self.sample_every as f64
    }
}

/// `samples` states as columns; column 0 is the state after the transient.
pub fn integrate<F>(f: F, init: State3, grid: OdeGrid, samples: usize) -> Result<DMatrix<f64>>
where
    F: Fn(&State3) -> Option<State3>,
{
    if !(grid.dt > 0.0 && grid.dt.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "dt must be positive, got {}",
            grid.dt
        )));
    }
    if grid.sample_every == 0 {
        return Err(Error::InvalidConfig("sample_every must be >= 1".into()));
    }
    let mut out = DMatrix::zeros(3, samples);
    let mut x = init;
    let total = (grid.transient + samples) * grid.sample_every;
    for step in 0..total {
        if step % grid.sample_every == 0 {
            let kept = step / grid.sample_every;
            if kept >= grid.transient {
                out.set_column(kept - grid.transient, &nalgebra::Vector3::from(x));
            }
        }
        x = rk4_step(&f, &x, grid.dt).ok_or(Error::Overflow { step })?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow { step });
        }
    }
    Ok(out)
}

/// Lorenz63 trajectory of `steps` samples starting at `init`.
pub fn lorenz63(init: State3, dt: f64, steps: usize) -> Result<DMatrix<f64>> {
    integrate(|x| Some(lorenz63_rhs(x)), init, OdeGrid::new(dt), steps)
}

/// Double-scroll trajectory of `steps` samples starting at `init`.
pub fn double_scroll(init: State3, dt: f64, steps: usize) -> Result<DMatrix<f64>> {
    integrate(double_scroll_rhs, init, OdeGrid::new(dt), steps)
}
