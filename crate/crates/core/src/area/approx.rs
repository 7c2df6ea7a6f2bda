//! Handoff approximation for higher echoes.
//!
//! Deep enough in the medium the first input has been absorbed and the pair
//! (θ₂, θ_e1) acts like a fresh two-pulse excitation entering at αz₁. The
//! primary-echo formula with `(θ₁(0), θ₂(z)) → (θ₂(z₁), θ_e1(z))` then
//! approximates the secondary echo, and the same step one level up gives
//! the third.

use std::f64::consts::PI;

use super::closed::second_pulse_area;
use crate::error::{Error, Result};

/// `2·arctan[Γτ·sin θ_a(z₁)·sin²(θ_b(z)/2)·sinh((αz − αz₁)/2)]`, where
/// `theta_b` supplies the later pulse's area at depth `αz`.
pub fn secondary_echo_approx(
    handoff_z1: f64,
    first_at_z1: f64,
    theta_b: impl Fn(f64) -> f64,
    gamma_tau: f64,
    alpha_z: f64,
) -> Result<f64> {
    if alpha_z < handoff_z1 {
        return Err(Error::Domain(format!(
            "alpha_z = {alpha_z} lies before the handoff point {handoff_z1}"
        )));
    }
    let s = (theta_b(alpha_z) / 2.0).sin();
    let arg = gamma_tau * first_at_z1.sin() * s * s * ((alpha_z - handoff_z1) / 2.0).sinh();
    Ok(2.0 * arg.atan())
}

/// [`secondary_echo_approx`] with the later pulse propagated from the
/// handoff point as the second pulse of a fresh pair.
pub fn handoff_echo_approx(
    handoff_z1: f64,
    first_at_z1: f64,
    second_at_z1: f64,
    gamma_tau: f64,
    alpha_z: f64,
) -> Result<f64> {
    secondary_echo_approx(
        handoff_z1,
        first_at_z1,
        |z| second_pulse_area(first_at_z1, second_at_z1, z - handoff_z1),
        gamma_tau,
        alpha_z,
    )
}

/// Depth at which the first input has fallen to 5% of its entrance area.
pub fn handoff_heuristic(theta1_in: f64) -> Result<f64> {
    if !(theta1_in > 0.0 && theta1_in < PI) {
        return Err(Error::Domain(format!(
            "handoff heuristic needs theta1 in (0, pi), got {theta1_in}"
        )));
    }
    Ok(2.0 * ((theta1_in / 2.0).tan() / (0.025 * theta1_in).tan()).ln())
}
