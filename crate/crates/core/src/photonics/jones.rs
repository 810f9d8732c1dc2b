//! Jones matrices for ideal wave plates.

use nalgebra::{Complex, Matrix2, Vector2};

pub type C64 = Complex<f64>;
pub type Jones = Matrix2<C64>;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Half-wave plate with its fast axis at `theta` radians from horizontal:
/// `-i [[cos 2θ, sin 2θ], [sin 2θ, -cos 2θ]]`.
pub fn hwp_jones(theta: f64) -> Jones {
    let (s, c) = (2.0 * theta).sin_cos();
    let minus_i = C64::new(0.0, -1.0);
    Matrix2::new(re(c), re(s), re(s), re(-c)) * minus_i
}

/// Quarter-wave plate with its fast axis at `theta` radians from horizontal.
pub fn qwp_jones(theta: f64) -> Jones {
    let (s, c) = theta.sin_cos();
    let i = C64::new(0.0, 1.0);
    let phase = C64::from_polar(1.0, -std::f64::consts::FRAC_PI_4);
    let off = (re(1.0) - i) * (s * c);
    Matrix2::new(re(c * c) + i * (s * s), off, off, re(s * s) + i * (c * c)) * phase
}

/// Transmission state of a linear polarizer at `theta`: `cos θ |H> + sin θ |V>`.
pub fn linear_polarizer(theta: f64) -> Vector2<C64> {
    let (s, c) = theta.sin_cos();
    Vector2::new(re(c), re(s))
}

/// Largest entry of `|U^† U - I|`.
pub fn unitarity_error(m: &Jones) -> f64 {
    let prod = m.adjoint() * m - Jones::identity();
    prod.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
