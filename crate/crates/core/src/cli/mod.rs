//! Command-line front end.
//!
//! Configuration is layered: built-in defaults, then the figure preset (for
//! `figure`), then a TOML file given with `--config`, then command-line
//! flags. The effective configuration is written into every output.

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{read_measurements, run_areas, run_cascade, run_compare, run_figure, run_fit, run_mb, run_phasing};
pub use config::{Format, MbConfig, Mode, RunConfig, MAX_ECHO_ORDER_LIMIT};
pub use output::{emit, Cell, Dataset};

use crate::error::{Error, Result};
use crate::mb::PulseShape;

#[derive(Debug, Parser)]
#[command(
    name = "echo-area",
    version,
    about = "Pulse-area dynamics of photon echoes in optically dense media"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form areas of the inputs, the primary echo and the echo total.
    Areas,
    /// Integrate the echo-train cascade.
    Cascade,
    /// Run the Maxwell-Bloch oracle.
    Mb {
        /// Also write a down-sampled field map (alpha_z, t, omega) here.
        #[arg(long)]
        field_map: Option<PathBuf>,
    },
    /// Compare the Maxwell-Bloch oracle with the cascade.
    Compare,
    /// Dataset for one of the two reference regimes.
    Figure {
        /// 1: theta2 = 0.999 pi, 2: theta2 = 1.001 pi (theta1 = 0.1 pi).
        #[arg(value_parser = clap::value_parser!(u8).range(1..=2))]
        which: u8,
    },
    /// Print the symbolic phasing sources of an echo.
    Phasing {
        /// Pulses in the sequence 1, 2, e1, e2, ...
        #[arg(long)]
        pulses: Option<u32>,
        /// Echo index to extract.
        #[arg(long)]
        echo: Option<u32>,
    },
    /// Fit the coherence survival from primary-echo areas.
    Fit {
        /// CSV with columns tau and echo_area (radians) or echo_area_pi.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

/// Flags shared by every subcommand; unset flags leave the config alone.
#[derive(Debug, Default, Args)]
pub struct Flags {
    #[arg(long, global = true)]
    pub theta1_pi: Option<f64>,
    #[arg(long, global = true)]
    pub theta2_pi: Option<f64>,
    #[arg(long, global = true)]
    pub gamma_tau: Option<f64>,
    #[arg(long, global = true)]
    pub alpha_z_max: Option<f64>,
    #[arg(long, global = true)]
    pub dz: Option<f64>,
    #[arg(long, global = true)]
    pub max_echo_order: Option<u32>,
    /// Omit echoes that never exceed this area (radians).
    #[arg(long, global = true)]
    pub drop_threshold: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write every n-th depth sample.
    #[arg(long, global = true)]
    pub stride: Option<usize>,
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Oracle ensemble size.
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    /// Oracle depth step.
    #[arg(long, global = true)]
    pub mb_dz: Option<f64>,
    /// Oracle pulse width in units of tau.
    #[arg(long, global = true)]
    pub pulse_width: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub shape: Option<ShapeArg>,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum ShapeArg {
    Sech,
    Rectangular,
    Gaussian,
}

impl From<ShapeArg> for PulseShape {
    fn from(s: ShapeArg) -> Self {
        match s {
            ShapeArg::Sech => PulseShape::Sech,
            ShapeArg::Rectangular => PulseShape::Rectangular,
            ShapeArg::Gaussian => PulseShape::Gaussian,
        }
    }
}

fn overlay(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => overlay(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

impl Cli {
    /// Effective configuration after applying every layer.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        match &self.command {
            Command::Areas => cfg.mode = Mode::Areas,
            Command::Cascade => cfg.mode = Mode::Cascade,
            Command::Mb { .. } => cfg.mode = Mode::Mb,
            Command::Compare => cfg.mode = Mode::Compare,
            Command::Figure { which } => {
                cfg.mode = Mode::Figure;
                cfg.figure = Some(*which);
                cfg.theta1_pi = 0.1;
                cfg.theta2_pi = if *which == 1 { 0.999 } else { 1.001 };
                cfg.gamma_tau = 1.0;
                cfg.alpha_z_max = 40.0;
            }
            Command::Phasing { .. } => cfg.mode = Mode::Phasing,
            Command::Fit { .. } => cfg.mode = Mode::Fit,
        }

        if let Some(path) = &self.flags.config {
            let text = std::fs::read_to_string(path)?;
            let file: toml::Table =
                toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let mut base =
                toml::Table::try_from(&cfg).map_err(|e| Error::Config(format!("cannot serialize config: {e}")))?;
            let mode = cfg.mode;
            let figure = cfg.figure;
            overlay(&mut base, file);
            cfg = RunConfig::from_toml_str(&toml::to_string(&base).unwrap_or_default())?;
            // the subcommand decides what runs
            cfg.mode = mode;
            if figure.is_some() {
                cfg.figure = figure;
            }
        }

        let f = &self.flags;
        macro_rules! set {
            ($flag:expr, $field:expr) => {
                if let Some(v) = $flag.clone() {
                    $field = v.into();
                }
            };
        }
        set!(f.theta1_pi, cfg.theta1_pi);
        set!(f.theta2_pi, cfg.theta2_pi);
        set!(f.gamma_tau, cfg.gamma_tau);
        set!(f.alpha_z_max, cfg.alpha_z_max);
        set!(f.dz, cfg.dz);
        set!(f.max_echo_order, cfg.max_echo_order);
        set!(f.drop_threshold, cfg.drop_threshold_rad);
        set!(f.format, cfg.format);
        set!(f.stride, cfg.stride);
        set!(f.nodes, cfg.mb.nodes);
        set!(f.mb_dz, cfg.mb.dz);
        set!(f.pulse_width, cfg.mb.pulse_width);
        set!(f.shape, cfg.mb.shape);
        if let Some(p) = &f.out {
            cfg.output_path = Some(p.clone());
        }
        match &self.command {
            Command::Mb { field_map: Some(p) } => cfg.mb.field_map_path = Some(p.clone()),
            Command::Phasing { pulses, echo } => {
                set!(pulses, cfg.pulses);
                set!(echo, cfg.echo);
            }
            Command::Fit { input: Some(p) } => cfg.input_path = Some(p.clone()),
            _ => {}
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs the configured mode and returns the rendered output.
pub fn execute(cfg: &RunConfig) -> Result<String> {
    let data = match cfg.mode {
        Mode::Areas => run_areas(cfg)?,
        Mode::Cascade => run_cascade(cfg)?,
        Mode::Figure => run_figure(cfg)?,
        Mode::Mb => run_mb(cfg)?,
        Mode::Compare => run_compare(cfg)?,
        Mode::Phasing => run_phasing(cfg)?,
        Mode::Fit => run_fit(cfg)?,
    };
    data.render(cfg, cfg.format)
}

/// Entry point used by the binary.
pub fn run(cli: &Cli) -> Result<()> {
    let cfg = cli.resolve()?;
    let text = execute(&cfg)?;
    emit(&text, &cfg)
}
