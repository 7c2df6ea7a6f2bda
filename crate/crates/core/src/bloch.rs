//! Single-atom Bloch dynamics in the hard-pulse limit.
//!
//! A pulse of area θ rotates the Bloch vector about the u axis; between
//! pulses the coherence (u, v) precesses at the detuning Δ about the w axis
//! and decays at the homogeneous rate γ. Population decay is not modelled.

use crate::error::{Error, Result};

/// Bloch vector (u, v, w) of a two-level atom at one detuning.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl BlochVector {
    pub const GROUND: BlochVector = BlochVector {
        u: 0.0,
        v: 0.0,
        w: -1.0,
    };

    pub fn new(u: f64, v: f64, w: f64) -> Self {
        Self { u, v, w }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.u * self.u + self.v * self.v + self.w * self.w
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Magnitude of the transverse coherence.
    pub fn coherence(&self) -> f64 {
        self.u.hypot(self.v)
    }
}

impl Default for BlochVector {
    fn default() -> Self {
        Self::GROUND
    }
}

/// Instantaneous rotation by a signed pulse area.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseRotation {
    pub theta: f64,
}

impl PulseRotation {
    pub fn new(theta: f64) -> Self {
        Self { theta }
    }
}

/// Free precession and dephasing over `duration` (units of τ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreeEvolution {
    pub duration: f64,
    pub detuning: f64,
    pub gamma: f64,
}

impl FreeEvolution {
    pub fn new(duration: f64, detuning: f64, gamma: f64) -> Self {
        Self {
            duration,
            detuning,
            gamma,
        }
    }

    /// Coherence survival factor e^(−γ·duration).
    pub fn decay(&self) -> f64 {
        (-self.gamma * self.duration).exp()
    }
}

pub fn apply_pulse(state: BlochVector, rot: PulseRotation) -> BlochVector {
    let (s, c) = rot.theta.sin_cos();
    BlochVector {
        u: state.u,
        v: state.v * c + state.w * s,
        w: -state.v * s + state.w * c,
    }
}

pub fn free_evolve(state: BlochVector, ev: FreeEvolution) -> Result<BlochVector> {
    if !(ev.duration >= 0.0) {
        return Err(Error::Domain(format!(
            "free evolution duration must be non-negative, got {}",
            ev.duration
        )));
    }
    let (s, c) = (ev.detuning * ev.duration).sin_cos();
    let d = ev.decay();
    Ok(BlochVector {
        u: d * (state.u * c - state.v * s),
        v: d * (state.u * s + state.v * c),
        w: state.w,
    })
}

/// Resonant (Δ = 0) response to a partially elapsed pulse of accumulated
/// area `theta_partial`, starting from coherence `v0` and inversion `w0`.
pub fn resonant_pulse_response(v0: f64, w0: f64, theta_partial: f64) -> (f64, f64) {
    let (s, c) = theta_partial.sin_cos();
    (v0 * c + w0 * s, w0 * c - v0 * s)
}
