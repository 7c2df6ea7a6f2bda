//! Symbolic phasing algebra.
//!
//! Expands `U(τ)T(θₙ)…U(τ)T(θ₁)` acting on the ground state into Fourier
//! harmonics of Δτ with exact trigonometric-polynomial coefficients, then
//! keeps the harmonic-zero parts at an echo's emission time. Those are the
//! phasing coherence v₀ and inversion w₀ that drive the echo's area.

mod poly;
mod render;
mod sources;
mod state;

pub use poly::{AreaFactor, PulseLabel, TrigMonomial, TrigPoly};
pub use render::render_half_angle;
pub use sources::{evaluate_sources, extract_phasing, CompiledSources, PhasingSources};
pub use state::{
    symbolic_apply_pulse, symbolic_free_evolve, HarmonicSeries, HarmonicTerm, Quadrature, SymbolicBlochState,
};

pub(crate) use sources::check_gamma_tau;
