//! Pulse-area evolution in optical depth.
//!
//! Input pulses obey the McCall-Hahn theorem and have closed forms. Each echo
//! obeys `∂θ = v₀·cos²(θ/2) + (w₀/2)·sin θ` with phasing sources that depend
//! on the current areas of all earlier pulses, so the echo train is
//! integrated as a lower-triangular cascade.

mod approx;
mod cascade;
mod closed;
mod fit;

pub use approx::{handoff_echo_approx, handoff_heuristic, secondary_echo_approx};
pub use cascade::{cascade_solve, AreaTrajectory, MediumConfig};
pub use closed::{
    branch_offset, echo_area_rhs, eta_step, mccall_hahn_area, primary_echo_closed, second_pulse_area,
    second_pulse_area_in, theta1_closed, theta2_closed, total_echo_area, ClosedFormParams,
};
pub use fit::{fit_gamma_tau, FitReport, Measurement};

/// Handoff depth for the secondary-echo approximation in the figure regimes.
pub const HANDOFF_Z1: f64 = 4.1;
/// Handoff depth for the third-echo approximation in the figure regimes.
pub const HANDOFF_Z2: f64 = 16.3;
/// Default number of echoes tracked by the cascade.
pub const DEFAULT_MAX_ECHO_ORDER: u32 = 6;
/// Default output threshold for echoes that never grow.
pub const DEFAULT_DROP_THRESHOLD: f64 = 1e-6;
