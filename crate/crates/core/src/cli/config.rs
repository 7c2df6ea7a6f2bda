use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::area::{MediumConfig, DEFAULT_DROP_THRESHOLD, DEFAULT_MAX_ECHO_ORDER};
use crate::error::{Error, Result};
use crate::mb::{PulseShape, DEFAULT_NODES, DEFAULT_PULSE_WIDTH, DEFAULT_WIDTH_PRODUCT};

/// Largest echo order the CLI accepts; source size grows ~3× per order.
pub const MAX_ECHO_ORDER_LIMIT: u32 = 10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Areas,
    #[default]
    Cascade,
    Mb,
    Compare,
    Figure,
    Phasing,
    Fit,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Maxwell-Bloch oracle settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MbConfig {
    pub nodes: usize,
    /// Δ_in·δt.
    pub width_product: f64,
    /// δt in units of τ.
    pub pulse_width: f64,
    pub shape: PulseShape,
    /// Step in αz of the field march.
    pub dz: f64,
    /// Time step in units of δt.
    pub dt_fraction: f64,
    /// Write every n-th depth and time sample of the field map.
    pub field_stride: usize,
    /// Optional down-sampled field map output.
    pub field_map_path: Option<PathBuf>,
}

impl Default for MbConfig {
    fn default() -> Self {
        Self {
            nodes: DEFAULT_NODES,
            width_product: DEFAULT_WIDTH_PRODUCT,
            pulse_width: DEFAULT_PULSE_WIDTH,
            shape: PulseShape::Sech,
            dz: 0.02,
            dt_fraction: 1.0 / 40.0,
            field_stride: 10,
            field_map_path: None,
        }
    }
}

/// Effective configuration of one CLI run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub theta1_pi: f64,
    pub theta2_pi: f64,
    pub gamma_tau: f64,
    pub alpha_z_max: f64,
    pub dz: f64,
    pub max_echo_order: u32,
    pub drop_threshold_rad: f64,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    /// Write every n-th depth sample of area tables.
    pub stride: usize,
    /// `figure` mode: which figure regime.
    pub figure: Option<u8>,
    /// `phasing` mode: number of pulses in the sequence.
    pub pulses: u32,
    /// `phasing` mode: echo to extract.
    pub echo: u32,
    /// `fit` mode: measurement file.
    pub input_path: Option<PathBuf>,
    pub mb: MbConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::default(),
            theta1_pi: 0.1,
            theta2_pi: 0.999,
            gamma_tau: 1.0,
            alpha_z_max: 40.0,
            dz: 1e-3,
            max_echo_order: DEFAULT_MAX_ECHO_ORDER,
            drop_threshold_rad: DEFAULT_DROP_THRESHOLD,
            output_path: None,
            format: Format::default(),
            stride: 10,
            figure: None,
            pulses: 2,
            echo: 1,
            input_path: None,
            mb: MbConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize config: {e}")))
    }

    pub fn medium(&self) -> MediumConfig {
        MediumConfig {
            alpha_z_max: self.alpha_z_max,
            dz: self.dz,
            gamma_tau: self.gamma_tau,
            initial_inversion: -1.0,
        }
    }

    pub fn theta1(&self) -> f64 {
        self.theta1_pi * std::f64::consts::PI
    }

    pub fn theta2(&self) -> f64 {
        self.theta2_pi * std::f64::consts::PI
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("theta1_pi", self.theta1_pi), ("theta2_pi", self.theta2_pi)] {
            if !(0.0..2.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 2), got {v}")));
            }
        }
        self.medium().validate()?;
        if self.max_echo_order == 0 || self.max_echo_order > MAX_ECHO_ORDER_LIMIT {
            return Err(Error::Config(format!(
                "max_echo_order must lie in 1..={MAX_ECHO_ORDER_LIMIT}, got {}",
                self.max_echo_order
            )));
        }
        if !(self.drop_threshold_rad >= 0.0) {
            return Err(Error::Config("drop_threshold_rad must be >= 0".into()));
        }
        if self.stride == 0 || self.mb.field_stride == 0 {
            return Err(Error::Config("strides must be at least 1".into()));
        }
        if let Some(f) = self.figure {
            if f != 1 && f != 2 {
                return Err(Error::Config(format!("figure must be 1 or 2, got {f}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let mut c = RunConfig {
            mode: Mode::Figure,
            figure: Some(2),
            output_path: Some("out/fig2.csv".into()),
            ..Default::default()
        };
        c.mb.shape = PulseShape::Gaussian;
        let text = c.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), c);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let c = RunConfig::from_toml_str("gamma_tau = 0.9\n[mb]\nnodes = 101\n").unwrap();
        assert_eq!(c.gamma_tau, 0.9);
        assert_eq!(c.mb.nodes, 101);
        assert_eq!(c.theta1_pi, 0.1);
        assert!(RunConfig::from_toml_str("gamma = 0.9").is_err());
    }

    #[test]
    fn validation() {
        assert!(RunConfig::default().validate().is_ok());
        let bad = RunConfig {
            theta2_pi: 2.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = RunConfig {
            max_echo_order: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
