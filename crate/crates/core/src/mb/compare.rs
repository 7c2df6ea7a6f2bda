use serde::Serialize;

use super::ensemble::EnsembleGrid;
use super::extract::{extract_echo_areas, EchoAreas};
use super::propagate::{propagate, GridResolution};
use super::pulse::PulseSpec;
use crate::area::{cascade_solve, AreaTrajectory, MediumConfig};
use crate::error::{Error, Result};
use crate::phasing::PulseLabel;

/// Pulse areas per label on a z-grid, as produced by either pipeline.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AreaTable {
    pub z_grid: Vec<f64>,
    pub labels: Vec<PulseLabel>,
    pub areas: Vec<Vec<f64>>,
    /// Samples to leave out of the summary, same layout as `areas`.
    pub flagged: Vec<Vec<bool>>,
}

impl AreaTable {
    fn at(&self, i: usize, z: f64) -> f64 {
        let zs = &self.z_grid;
        let k = zs.partition_point(|x| *x <= z).clamp(1, zs.len() - 1);
        let a = (z - zs[k - 1]) / (zs[k] - zs[k - 1]);
        self.areas[i][k - 1] * (1.0 - a) + self.areas[i][k] * a
    }
}

impl From<&EchoAreas> for AreaTable {
    fn from(e: &EchoAreas) -> Self {
        Self {
            z_grid: e.z_grid.clone(),
            labels: e.labels.clone(),
            areas: e.areas.clone(),
            flagged: e.flagged.clone(),
        }
    }
}

impl From<&AreaTrajectory> for AreaTable {
    fn from(t: &AreaTrajectory) -> Self {
        Self {
            z_grid: t.z_grid.clone(),
            labels: t.labels.clone(),
            areas: t.theta.clone(),
            flagged: t.theta.iter().map(|s| vec![false; s.len()]).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabelDeviation {
    pub label: PulseLabel,
    pub max_abs: f64,
    pub at_alpha_z: f64,
}

/// Oracle areas against reference areas interpolated onto the oracle grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareReport {
    pub z_grid: Vec<f64>,
    pub labels: Vec<PulseLabel>,
    pub oracle: Vec<Vec<f64>>,
    pub reference: Vec<Vec<f64>>,
    pub abs_diff: Vec<Vec<f64>>,
    pub flagged: Vec<Vec<bool>>,
    pub per_label: Vec<LabelDeviation>,
    /// Largest difference over unflagged samples, radians.
    pub max_deviation: f64,
    /// `max_deviation` relative to the largest reference area.
    pub max_relative: f64,
    /// Largest difference including flagged samples.
    pub max_deviation_all: f64,
    /// Share of compared samples that were flagged.
    pub flagged_fraction: f64,
}

/// Compares two tables on the labels they share. The reference must cover
/// the oracle's depth range.
pub fn compare_tables(oracle: &AreaTable, reference: &AreaTable) -> Result<CompareReport> {
    let (Some(&zo), Some(&zr)) = (oracle.z_grid.last(), reference.z_grid.last()) else {
        return Err(Error::Config("cannot compare empty tables".into()));
    };
    if reference.z_grid.len() < 2 || zr < zo - 1e-9 {
        return Err(Error::Config(format!(
            "reference covers alpha_z up to {zr}, oracle needs {zo}"
        )));
    }
    let mut report = CompareReport {
        z_grid: oracle.z_grid.clone(),
        labels: Vec::new(),
        oracle: Vec::new(),
        reference: Vec::new(),
        abs_diff: Vec::new(),
        flagged: Vec::new(),
        per_label: Vec::new(),
        max_deviation: 0.0,
        max_relative: 0.0,
        max_deviation_all: 0.0,
        flagged_fraction: 0.0,
    };
    let (mut n_flagged, mut n_total) = (0usize, 0usize);
    let mut ref_peak: f64 = 0.0;
    for (i, label) in oracle.labels.iter().enumerate() {
        let Some(r) = reference.labels.iter().position(|l| l == label) else {
            continue;
        };
        let rv: Vec<f64> = oracle.z_grid.iter().map(|&z| reference.at(r, z)).collect();
        let diff: Vec<f64> = oracle.areas[i].iter().zip(&rv).map(|(a, b)| (a - b).abs()).collect();
        let mut worst = LabelDeviation {
            label: *label,
            max_abs: 0.0,
            at_alpha_z: 0.0,
        };
        for (j, d) in diff.iter().enumerate() {
            if !oracle.flagged[i][j] && *d > worst.max_abs {
                worst.max_abs = *d;
                worst.at_alpha_z = oracle.z_grid[j];
            }
        }
        report.max_deviation_all = diff.iter().fold(report.max_deviation_all, |m, d| m.max(*d));
        n_flagged += oracle.flagged[i].iter().filter(|f| **f).count();
        n_total += diff.len();
        ref_peak = rv.iter().fold(ref_peak, |m, x| m.max(x.abs()));
        report.max_deviation = report.max_deviation.max(worst.max_abs);
        report.labels.push(*label);
        report.oracle.push(oracle.areas[i].clone());
        report.reference.push(rv);
        report.abs_diff.push(diff);
        report.flagged.push(oracle.flagged[i].clone());
        report.per_label.push(worst);
    }
    report.max_relative = if ref_peak > 0.0 {
        report.max_deviation / ref_peak
    } else {
        0.0
    };
    if n_total > 0 {
        report.flagged_fraction = n_flagged as f64 / n_total as f64;
    }
    Ok(report)
}

/// Settings of the area-theorem side of a cross-validation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CascadeSettings {
    pub theta1: f64,
    pub theta2: f64,
    pub medium: MediumConfig,
    pub max_echo_order: u32,
}

/// Runs the Maxwell-Bloch oracle and the area cascade on the same two-pulse
/// input and reports their per-echo differences.
pub fn compare_with_area_theorem(
    pulses: &[PulseSpec],
    ensemble: &EnsembleGrid,
    oracle_medium: &MediumConfig,
    resolution: &GridResolution,
    cascade: &CascadeSettings,
) -> Result<CompareReport> {
    check_consistent(pulses, oracle_medium, cascade)?;
    let field = propagate(pulses, ensemble, oracle_medium, resolution)?;
    let oracle = extract_echo_areas(&field, 1.0, cascade.max_echo_order)?;
    let traj = cascade_solve(
        &cascade.medium,
        cascade.theta1,
        cascade.theta2,
        cascade.max_echo_order,
        0.0,
    )?;
    compare_tables(&AreaTable::from(&oracle), &AreaTable::from(&traj))
}

fn check_consistent(pulses: &[PulseSpec], oracle: &MediumConfig, cascade: &CascadeSettings) -> Result<()> {
    if pulses.len() != 2 {
        return Err(Error::Config(format!(
            "comparison needs two input pulses, got {}",
            pulses.len()
        )));
    }
    for (k, (p, th)) in pulses.iter().zip([cascade.theta1, cascade.theta2]).enumerate() {
        if (p.area - th).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "pulse {} has area {} in the oracle but {} in the cascade",
                k + 1,
                p.area,
                th
            )));
        }
        if (p.center_time - k as f64).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "pulse {} must be centred at {} tau for the cascade's delay structure",
                k + 1,
                k
            )));
        }
    }
    if oracle.gamma_tau != cascade.medium.gamma_tau {
        return Err(Error::Config(format!(
            "gamma_tau differs between pipelines: oracle {}, cascade {}",
            oracle.gamma_tau, cascade.medium.gamma_tau
        )));
    }
    if oracle.initial_inversion != cascade.medium.initial_inversion {
        return Err(Error::Config("initial inversion differs between pipelines".into()));
    }
    if cascade.medium.alpha_z_max < oracle.alpha_z_max {
        return Err(Error::Config("cascade must reach at least the oracle's depth".into()));
    }
    Ok(())
}
