//! Pulse-area theory of photon echoes in optically dense two-level media.
//!
//! Units throughout: the pulse delay τ is 1, propagation distance is the
//! optical depth αz, and angles are radians. The crate is split into
//!
//! * [`bloch`]: exact single-atom rotations and free evolution,
//! * [`phasing`]: symbolic expansion of multi-pulse sequences and extraction
//!   of the phasing sources (v₀, w₀) that drive each echo,
//! * [`area`]: closed-form area solutions, the echo-train cascade integrator
//!   and the Γτ spectroscopy fit,
//! * [`mb`]: a full Maxwell-Bloch time-domain simulator used as an
//!   independent oracle,
//! * [`cli`]: configuration and the command-line front end.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod area;
pub mod bloch;
pub mod cli;
pub mod error;
pub mod mb;
pub mod phasing;

pub use error::{Error, Result};
