//! Two-photon polarization states and their compilation onto wave plates.
//!
//! A pair source emits `α|HH> + e^{iφ} β|VV>`; local rotations `U_A ⊗ U_B`
//! then reach any target `a|HH> + b|HV> + c|VH> + d|VV>` with `ad - bc ≠ 0`.
//! Writing the target as the coefficient matrix `C = [[a, b], [c, d]]`, the
//! decomposition is `C = U_A diag(α, β e^{iφ}) U_Bᵀ`.

use nalgebra::{Matrix2, Vector2};

use super::jones::{hwp_jones, Jones, C64};
use crate::error::{Error, Result};

/// `a|HH> + b|HV> + c|VH> + d|VV>`, photon A first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl TwoQubitState {
    /// Builds a state, rejecting coefficients that are not unit-norm to 1e-12.
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        let s = TwoQubitState { a, b, c, d };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "two-qubit coefficients have squared norm {norm}, expected 1"
            )));
        }
        Ok(s)
    }

    /// Normalizes arbitrary real coefficients.
    pub fn from_real(coeffs: [f64; 4]) -> Result<Self> {
        let n = coeffs.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n == 0.0 {
            return Err(Error::ZeroWindow);
        }
        let [a, b, c, d] = coeffs.map(|v| C64::new(v / n, 0.0));
        Ok(TwoQubitState { a, b, c, d })
    }

    pub fn bell_phi_plus() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let z = C64::new(0.0, 0.0);
        TwoQubitState {
            a: h,
            b: z,
            c: z,
            d: h,
        }
    }

    pub fn coefficients(&self) -> [C64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn matrix(&self) -> Matrix2<C64> {
        Matrix2::new(self.a, self.b, self.c, self.d)
    }

    fn from_matrix(m: &Matrix2<C64>) -> Self {
        TwoQubitState {
            a: m[(0, 0)],
            b: m[(0, 1)],
            c: m[(1, 0)],
            d: m[(1, 1)],
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coefficients().iter().map(|z| z.norm_sqr()).sum()
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &TwoQubitState) -> f64 {
        self.coefficients()
            .iter()
            .zip(other.coefficients())
            .map(|(x, y)| x.conj() * y)
            .sum::<C64>()
            .norm_sqr()
    }

    /// Applies `ua ⊗ ub`.
    pub fn apply_local(&self, ua: &Jones, ub: &Jones) -> Self {
        Self::from_matrix(&(ua * self.matrix() * ub.transpose()))
    }
}

/// An SU(2) element `[[u, v], [-v*, u*]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su2 {
    pub u: C64,
    pub v: C64,
}

impl Su2 {
    pub fn matrix(&self) -> Jones {
        Matrix2::new(self.u, self.v, -self.v.conj(), self.u.conj())
    }

    /// True when both entries are real, i.e. the element is a plane rotation.
    pub fn is_real(&self, tol: f64) -> bool {
        self.u.im.abs() <= tol && self.v.im.abs() <= tol
    }

    /// Angle of the half-wave plate realizing this rotation up to a global
    /// phase and a `diag(1, -1)` absorbed into the source.
    ///
    /// Equals `½ arccos u` whenever `v <= 0`; the two-argument form keeps
    /// the sign of the rotation.
    pub fn hwp_angle(&self) -> f64 {
        0.5 * (-self.v.re).atan2(self.u.re)
    }
}

/// Wave-plate settings that prepare one photon pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchSettings {
    /// Source amplitude on `|HH>` (the smaller Schmidt coefficient).
    pub alpha: f64,
    /// Source amplitude magnitude on `|VV>`.
    pub beta: f64,
    /// Relative source phase `φ` on `|VV>`, set by the QHQ stack.
    pub phase: f64,
    pub unitary_a: Su2,
    pub unitary_b: Su2,
    /// HWP angle realizing `U_A`.
    pub theta_ua: f64,
    /// HWP angle realizing `U_B`.
    pub theta_ub: f64,
    /// HWP angle in front of the crystals for a vertically polarized pump:
    /// `½ arctan(β/α)`.
    pub source_theta: f64,
    /// Whether the HWP angles alone (plus `phase`) reproduce the target.
    /// Holds for real-amplitude targets; complex targets need the full
    /// `unitary_a`/`unitary_b`.
    pub hwp_exact: bool,
}

impl BenchSettings {
    /// Source state `α|HH> + e^{iφ} β|VV>`.
    pub fn source(&self) -> TwoQubitState {
        let z = C64::new(0.0, 0.0);
        TwoQubitState {
            a: C64::new(self.alpha, 0.0),
            b: z,
            c: z,
            d: C64::from_polar(self.beta, self.phase),
        }
    }

    /// State prepared by the general SU(2) rotations.
    pub fn reconstruct(&self) -> TwoQubitState {
        self.source()
            .apply_local(&self.unitary_a.matrix(), &self.unitary_b.matrix())
    }

    /// State prepared by the two half-wave plates at `theta_ua`, `theta_ub`.
    pub fn reconstruct_hwp(&self) -> TwoQubitState {
        self.source()
            .apply_local(&hwp_jones(self.theta_ua), &hwp_jones(self.theta_ub))
    }
}

/// Compiles a target pair state into source amplitudes and local rotations.
///
/// Fails for product states (`ad - bc = 0`) and for maximally entangled
/// states (`|ad - bc| = 1/2`), where the rotation is not unique.
pub fn waveplate_decompose(state: &TwoQubitState) -> Result<BenchSettings> {
    let c = state.matrix();
    let det = state.a * state.d - state.b * state.c;
    let det_abs = det.norm();
    if det_abs < 1e-12 {
        return Err(Error::SingularDecomposition(
            "ad - bc = 0 (product state)".into(),
        ));
    }
    if (det_abs - 0.5).abs() < 1e-9 {
        return Err(Error::SingularDecomposition(
            "|ad - bc| = 1/2 (maximally entangled state)".into(),
        ));
    }
    let disc = (1.0 - 4.0 * det_abs * det_abs).max(0.0).sqrt();
    let alpha = ((1.0 - disc) / 2.0).sqrt();
    let beta_c = det / alpha;

    // First column of U_A: eigenvector of C C† for eigenvalue alpha^2.
    let h = c * c.adjoint();
    let lambda = alpha * alpha;
    let cand1 = Vector2::new(h[(0, 1)], C64::new(lambda, 0.0) - h[(0, 0)]);
    let cand2 = Vector2::new(C64::new(lambda, 0.0) - h[(1, 1)], h[(1, 0)]);
    let col = if cand1.norm() >= cand2.norm() {
        cand1
    } else {
        cand2
    };
    let col = col / C64::new(col.norm(), 0.0);
    let (p, r) = (col[0], col[1]);
    let unitary_a = Su2 { u: p, v: -r.conj() };

    let d_inv = Matrix2::new(
        C64::new(1.0 / alpha, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(1.0, 0.0) / beta_c,
    );
    let ub_t = d_inv * unitary_a.matrix().adjoint() * c;
    let unitary_b = Su2 {
        u: ub_t[(0, 0)],
        v: ub_t[(1, 0)],
    };

    let tol = 1e-10;
    let hwp_exact = unitary_a.is_real(tol) && unitary_b.is_real(tol) && beta_c.im.abs() <= tol;
    Ok(BenchSettings {
        alpha,
        beta: beta_c.norm(),
        phase: beta_c.arg(),
        unitary_a,
        unitary_b,
        theta_ua: unitary_a.hwp_angle(),
        theta_ub: unitary_b.hwp_angle(),
        source_theta: 0.5 * beta_c.norm().atan2(alpha),
        hwp_exact,
    })
}
