use thiserror::Error;

use crate::phasing::PulseLabel;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("pulse label {0} is already used in this sequence")]
    DuplicateLabel(PulseLabel),

    #[error("no area supplied for pulse {0}")]
    MissingLabel(PulseLabel),

    #[error("echo index {echo_index} is not reachable from a sequence of {pulses} pulse(s)")]
    EchoIndex { echo_index: u32, pulses: usize },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("resolution violation: {0}")]
    Resolution(String),

    #[error("non-finite field at slice {slice} (alpha_z = {alpha_z}): {detail}")]
    NonFinite { slice: usize, alpha_z: f64, detail: String },

    #[error("window [{start}, {end}] lies outside the time grid [{grid_start}, {grid_end}]")]
    WindowOutOfGrid {
        start: f64,
        end: f64,
        grid_start: f64,
        grid_end: f64,
    },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable category used by the CLI for error reporting.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Config(_)
            | Error::DuplicateLabel(_)
            | Error::MissingLabel(_)
            | Error::EchoIndex { .. }
            | Error::Domain(_) => "validation",
            Error::Resolution(_) | Error::WindowOutOfGrid { .. } => "resolution",
            Error::NonFinite { .. } | Error::Fit(_) => "numeric",
            Error::Parse { .. } => "data",
            Error::Io(_) => "io",
        }
    }

    /// Process exit code for [`Error::category`].
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "validation" => 2,
            "resolution" => 3,
            "numeric" => 4,
            "data" => 5,
            _ => 6,
        }
    }
}
