//! Maxwell-Bloch oracle.
//!
//! Time-domain propagation of real fields through an inhomogeneously
//! broadened two-level medium, independent of the area theorem. Used to
//! check the area machinery and to look past it at pulse reshaping.

mod compare;
mod ensemble;
mod extract;
mod propagate;
mod pulse;

pub use compare::{
    compare_tables, compare_with_area_theorem, AreaTable, CascadeSettings, CompareReport, LabelDeviation,
};
pub use ensemble::{EnsembleGrid, MIN_BAND_PRODUCT};
pub use extract::{extract_echo_areas, window_area, EchoAreas, OVERLAP_FRACTION};
pub use propagate::{propagate, thread_pool, Diagnostics, FieldGrid, GridResolution, THREADS_ENV};
pub use pulse::{PulseShape, PulseSpec};

/// Pulse width δt of the default configuration, in units of τ.
pub const DEFAULT_PULSE_WIDTH: f64 = 1.0 / 40.0;
/// Default product Δ_in·δt.
pub const DEFAULT_WIDTH_PRODUCT: f64 = 10.0;
/// Default ensemble size.
pub const DEFAULT_NODES: usize = 201;

/// Default ensemble for a run over `time_span`: Gaussian line with
/// `Δ_in = 10/δt`, 201 nodes.
pub fn default_ensemble(time_span: f64) -> crate::Result<EnsembleGrid> {
    EnsembleGrid::for_time_span(DEFAULT_WIDTH_PRODUCT / DEFAULT_PULSE_WIDTH, DEFAULT_NODES, time_span)
}
