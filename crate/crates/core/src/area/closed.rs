//! Closed-form area solutions of the McCall-Hahn theorem and the primary echo.
//!
//! Every `2·arctan` solution is lifted off the principal branch so that the
//! trajectory stays continuous and starts at its initial value. The flow of
//! `∂θ = (w₀/2)·sin θ` never crosses a multiple of π, so the branch is fixed by
//! the initial area alone.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// 2π-multiple that keeps `2·arctan(tan(θ/2)·…)` on the branch of `theta0`.
pub fn branch_offset(theta0: f64) -> f64 {
    TWO_PI * ((theta0 + PI) / TWO_PI).floor()
}

/// True when `theta` sits on an odd multiple of π, where `tan(θ/2)` diverges.
fn on_separatrix(theta: f64) -> bool {
    (theta / 2.0).cos().abs() < 1e-15
}

/// Area of a lone pulse in a medium of uniform inversion `w0`:
/// `2·arctan[e^(w0·αz/2)·tan(θ₀/2)]`, branch-corrected.
pub fn mccall_hahn_area(theta0: f64, w0: f64, alpha_z: f64) -> f64 {
    if on_separatrix(theta0) {
        return theta0;
    }
    2.0 * ((w0 * alpha_z / 2.0).exp() * (theta0 / 2.0).tan()).atan() + branch_offset(theta0)
}

/// First input pulse in an absorber (w₀ = −1).
pub fn theta1_closed(theta1_in: f64, alpha_z: f64) -> f64 {
    mccall_hahn_area(theta1_in, -1.0, alpha_z)
}

/// Parameters of the sech form of the second-pulse solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormParams {
    /// `ln tan(θ₁(0)/2)`
    pub beta: f64,
    /// `tan(θ₂(0)/2) / sin θ₁(0)`
    pub kappa: f64,
}

impl ClosedFormParams {
    pub fn new(theta1_in: f64, theta2_in: f64) -> Result<Self> {
        if !(theta1_in > 0.0 && theta1_in < PI) {
            return Err(Error::Domain(format!(
                "sech form needs theta1 in (0, pi), got {theta1_in}"
            )));
        }
        if on_separatrix(theta2_in) {
            return Err(Error::Domain("sech form undefined for theta2 = pi".into()));
        }
        Ok(Self {
            beta: (theta1_in / 2.0).tan().ln(),
            kappa: (theta2_in / 2.0).tan() / theta1_in.sin(),
        })
    }

    /// `2·arctan[κ·sech(β − αz/2)]` on the principal branch.
    pub fn theta2_principal(&self, alpha_z: f64) -> f64 {
        2.0 * (self.kappa / (self.beta - alpha_z / 2.0).cosh()).atan()
    }
}

/// Area of a pulse that follows a first pulse of area `first_in` through a
/// medium of initial inversion `w_init`. The inversion it sees is
/// `w_init·cos θ₁(z)`; integrating with `x = tan²(θ₁/2)` gives
/// `tan(θ₂/2) = tan(θ₂(0)/2)·e^(w·αz/2)·(1 + x₀)/(1 + x)`.
pub fn second_pulse_area_in(first_in: f64, second_in: f64, w_init: f64, alpha_z: f64) -> f64 {
    if on_separatrix(second_in) {
        return second_in;
    }
    let gain = if on_separatrix(first_in) {
        // θ₁ stays at an odd multiple of π, so the inversion is −w_init
        (-w_init * alpha_z / 2.0).exp()
    } else {
        let x0 = (first_in / 2.0).tan().powi(2);
        let x = x0 * (w_init * alpha_z).exp();
        (w_init * alpha_z / 2.0).exp() * (1.0 + x0) / (1.0 + x)
    };
    2.0 * (gain * (second_in / 2.0).tan()).atan() + branch_offset(second_in)
}

/// [`second_pulse_area_in`] for an absorber.
pub fn second_pulse_area(first_in: f64, second_in: f64, alpha_z: f64) -> f64 {
    second_pulse_area_in(first_in, second_in, -1.0, alpha_z)
}

/// Second input pulse in an absorber, branch-corrected. Covers the edge
/// cases θ₁(0) ∈ {0, π} analytically, where the inversion seen by the
/// second pulse is the constant `−cos θ₁(0)`.
pub fn theta2_closed(theta1_in: f64, theta2_in: f64, alpha_z: f64) -> f64 {
    second_pulse_area(theta1_in, theta2_in, alpha_z)
}

/// Total area of all echoes: the McCall-Hahn area of the combined input
/// minus what the two inputs still carry.
pub fn total_echo_area(theta1_in: f64, theta2_in: f64, alpha_z: f64) -> f64 {
    theta1_closed(theta1_in + theta2_in, alpha_z)
        - theta2_closed(theta1_in, theta2_in, alpha_z)
        - theta1_closed(theta1_in, alpha_z)
}

/// Right-hand side of the echo area equation, `∂θ/∂(αz)`.
pub fn echo_area_rhs(theta: f64, v0: f64, w0: f64) -> f64 {
    let c = (theta / 2.0).cos();
    0.5 * (2.0 * v0 * c * c + w0 * theta.sin())
}

/// Exact step of `∂η = (v₀ + w₀η)/2` with frozen sources, `η = tan(θ/2)`.
pub fn eta_step(eta: f64, v0: f64, w0: f64, dz: f64) -> f64 {
    let a = w0 * dz / 2.0;
    if a.abs() < 1e-300 {
        return eta + v0 * dz / 2.0;
    }
    // η' = η·e^a + (v₀/w₀)(e^a − 1), written to stay accurate as w₀ → 0
    let em1 = a.exp_m1();
    eta + eta * em1 + v0 * dz / 2.0 * (em1 / a)
}

/// Primary echo: `2·arctan[Γτ²·sin θ₁(0)·sin²(θ₂(z)/2)·sinh(αz/2)]`.
pub fn primary_echo_closed(theta1_in: f64, theta2_z: f64, gamma_tau: f64, alpha_z: f64) -> f64 {
    let s = (theta2_z / 2.0).sin();
    2.0 * (gamma_tau * gamma_tau * theta1_in.sin() * s * s * (alpha_z / 2.0).sinh()).atan()
}
