use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Atoms must be sampled out to `MIN_BAND_PRODUCT / δt`. A sech spectrum has
/// dropped to about 2% there. A narrower band leaves part of the pulse
/// spectrum in a transparent medium and the transmitted field rings.
pub const MIN_BAND_PRODUCT: f64 = 3.0;

/// Discrete inhomogeneous line: detuning nodes and the weights that turn
/// `Σ weights·v` into `∫ dΔ G(Δ)/G(0)·v`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleGrid {
    pub detunings: Vec<f64>,
    pub weights: Vec<f64>,
    /// Standard deviation Δ_in of the Gaussian line, in 1/τ.
    pub line_width: f64,
}

impl EnsembleGrid {
    /// Symmetric uniform grid over a Gaussian line.
    ///
    /// A uniform grid of spacing dΔ makes the ensemble rephase spuriously
    /// every 2π/dΔ. Choosing `dΔ = 2π/(time_span + 1)` pushes the first
    /// revival past the end of the simulated window, which matters far more
    /// for echoes than covering the far wings of G: atoms detuned well
    /// beyond the pulse bandwidth are never driven.
    pub fn for_time_span(line_width: f64, nodes: usize, time_span: f64) -> Result<Self> {
        if nodes < 3 || nodes.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "ensemble needs an odd node count >= 3, got {nodes}"
            )));
        }
        if !(line_width > 0.0 && time_span > 0.0) {
            return Err(Error::Config("line width and time span must be positive".into()));
        }
        Ok(Self::uniform(line_width, nodes, 2.0 * PI / (time_span + 1.0)))
    }

    /// Smallest odd node count whose band reaches `MIN_BAND_PRODUCT / pulse_width`
    /// at the spacing `for_time_span` would pick.
    pub fn min_nodes(time_span: f64, pulse_width: f64) -> usize {
        let spacing = 2.0 * PI / (time_span + 1.0);
        let half = (MIN_BAND_PRODUCT / (pulse_width * spacing)).ceil() as usize;
        2 * half.max(1) + 1
    }

    /// Symmetric uniform grid with the given spacing.
    pub fn uniform(line_width: f64, nodes: usize, spacing: f64) -> Self {
        let half = (nodes / 2) as f64;
        let detunings: Vec<f64> = (0..nodes).map(|j| (j as f64 - half) * spacing).collect();
        let weights = detunings
            .iter()
            .map(|d| (-0.5 * (d / line_width).powi(2)).exp() * spacing)
            .collect();
        Self {
            detunings,
            weights,
            line_width,
        }
    }

    pub fn len(&self) -> usize {
        self.detunings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detunings.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        if self.len() < 2 {
            0.0
        } else {
            self.detunings[1] - self.detunings[0]
        }
    }

    /// Half-width of the sampled detuning band.
    pub fn half_span(&self) -> f64 {
        self.detunings.last().copied().unwrap_or(0.0)
    }

    /// First spurious rephasing time of the discrete grid.
    pub fn revival_time(&self) -> f64 {
        2.0 * PI / self.spacing()
    }

    pub fn validate(&self) -> Result<()> {
        if self.detunings.len() != self.weights.len() || self.is_empty() {
            return Err(Error::Config(
                "detunings and weights must be non-empty and equally long".into(),
            ));
        }
        if self.weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::Config("ensemble weights must be non-negative".into()));
        }
        let n = self.len();
        for j in 0..n / 2 {
            let (a, b) = (j, n - 1 - j);
            let scale = self.detunings[b].abs().max(1.0);
            if (self.detunings[a] + self.detunings[b]).abs() > 1e-12 * scale
                || (self.weights[a] - self.weights[b]).abs() > 1e-12 * self.weights[b].max(1e-300)
            {
                return Err(Error::Config("ensemble must be symmetric in detuning".into()));
            }
        }
        Ok(())
    }
}
