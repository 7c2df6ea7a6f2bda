use serde::{Deserialize, Serialize};

use super::closed::{eta_step, mccall_hahn_area, second_pulse_area_in};
use crate::error::{Error, Result};
use crate::phasing::{check_gamma_tau, CompiledSources, PhasingSources, PulseLabel};

/// Medium and z-grid for an area-theorem run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MediumConfig {
    /// Optical depth span αz.
    pub alpha_z_max: f64,
    /// Step in αz. The grid uses `round(alpha_z_max/dz)` equal steps.
    pub dz: f64,
    /// Coherence survival per delay, `e^(−γτ)`.
    pub gamma_tau: f64,
    /// Inversion of the unexcited medium, −1 for an absorber.
    pub initial_inversion: f64,
}

impl Default for MediumConfig {
    fn default() -> Self {
        Self {
            alpha_z_max: 40.0,
            dz: 1e-3,
            gamma_tau: 1.0,
            initial_inversion: -1.0,
        }
    }
}

impl MediumConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dz > 0.0 && self.dz <= 0.01) {
            return Err(Error::Config(format!("dz must lie in (0, 0.01], got {}", self.dz)));
        }
        self.validate_physics()
    }

    /// Checks everything except the step, for integrators with their own.
    pub(crate) fn validate_physics(&self) -> Result<()> {
        if !(self.alpha_z_max > 0.0 && self.alpha_z_max.is_finite()) {
            return Err(Error::Config(format!(
                "alpha_z_max must be positive, got {}",
                self.alpha_z_max
            )));
        }
        check_gamma_tau(self.gamma_tau).map_err(|e| Error::Config(e.to_string()))?;
        if !(self.initial_inversion >= -1.0 && self.initial_inversion <= 1.0) {
            return Err(Error::Config(format!(
                "initial_inversion must lie in [-1, 1], got {}",
                self.initial_inversion
            )));
        }
        Ok(())
    }

    pub fn z_grid(&self) -> Vec<f64> {
        let n = self.steps();
        (0..=n).map(|i| self.alpha_z_max * i as f64 / n as f64).collect()
    }

    fn steps(&self) -> usize {
        ((self.alpha_z_max / self.dz).round() as usize).max(1)
    }
}

/// Areas of every pulse over the z-grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AreaTrajectory {
    pub z_grid: Vec<f64>,
    /// Reported labels, inputs first, then echoes in order.
    pub labels: Vec<PulseLabel>,
    /// `theta[i][j]` is the area of `labels[i]` at `z_grid[j]`.
    pub theta: Vec<Vec<f64>>,
    /// Sum over all tracked pulses, including echoes below the drop threshold.
    pub theta_total: Vec<f64>,
    /// McCall-Hahn area of the combined input, `θ₁(0) + θ₂(0)`.
    pub mccall_hahn_total: Vec<f64>,
    /// Number of echoes integrated (reported or not).
    pub tracked_echoes: u32,
}

impl AreaTrajectory {
    pub fn series(&self, label: PulseLabel) -> Option<&[f64]> {
        let i = self.labels.iter().position(|l| *l == label)?;
        Some(&self.theta[i])
    }

    pub fn echo_labels(&self) -> impl Iterator<Item = PulseLabel> + '_ {
        self.labels.iter().copied().filter(|l| matches!(l, PulseLabel::Echo(_)))
    }

    /// Sum of the reported echo areas at sample `j`.
    pub fn echo_sum(&self, j: usize) -> f64 {
        self.labels
            .iter()
            .zip(&self.theta)
            .filter(|(l, _)| matches!(l, PulseLabel::Echo(_)))
            .map(|(_, s)| s[j])
            .sum()
    }

    pub fn index_of_z(&self, alpha_z: f64) -> usize {
        let n = self.z_grid.len() - 1;
        let dz = self.z_grid[n] / n as f64;
        ((alpha_z / dz).round().max(0.0) as usize).min(n)
    }
}

struct EchoSystem {
    sources: Vec<CompiledSources>,
    scale: f64,
    gamma_pows: Vec<f64>,
    sin: Vec<f64>,
    cos: Vec<f64>,
}

impl EchoSystem {
    fn new(max_echo_order: u32, gamma_tau: f64, w_init: f64) -> Result<Self> {
        let slots = PulseLabel::standard_sequence(max_echo_order);
        let sources = (1..=max_echo_order)
            .map(|k| PhasingSources::for_echo(k)?.compile(&slots))
            .collect::<Result<Vec<_>>>()?;
        let top = sources.iter().map(CompiledSources::max_gamma_power).max().unwrap_or(0);
        Ok(Self {
            sources,
            // the Bloch dynamics are linear, so a uniform initial inversion
            // w_init scales the ground-state sources by −w_init
            scale: -w_init,
            gamma_pows: (0..=top).map(|k| gamma_tau.powi(k as i32)).collect(),
            sin: vec![0.0; slots.len()],
            cos: vec![0.0; slots.len()],
        })
    }

    /// One η-step for every echo with sources evaluated at `inputs` and
    /// `probe` echo areas.
    fn step(&mut self, inputs: [f64; 2], probe: &[f64], from: &[f64], dz: f64, out: &mut [f64]) {
        for (slot, th) in inputs.iter().chain(probe).take(self.sin.len()).enumerate() {
            let (s, c) = th.sin_cos();
            self.sin[slot] = s;
            self.cos[slot] = c;
        }
        for (k, src) in self.sources.iter().enumerate() {
            let (v0, w0) = src.evaluate(&self.sin, &self.cos, &self.gamma_pows);
            out[k] = eta_step(from[k], self.scale * v0, self.scale * w0, dz);
        }
    }
}

fn eta_to_theta(eta: &[f64], out: &mut [f64]) {
    for (t, e) in out.iter_mut().zip(eta) {
        *t = 2.0 * e.atan();
    }
}

/// Integrates both inputs and the first `max_echo_order` echoes through the
/// medium. Inputs follow their closed forms; each echo follows the exact
/// η-update with sources frozen at the step midpoint, where they are
/// evaluated from the areas of all earlier pulses.
pub fn cascade_solve(
    config: &MediumConfig,
    theta1_in: f64,
    theta2_in: f64,
    max_echo_order: u32,
    drop_threshold: f64,
) -> Result<AreaTrajectory> {
    config.validate()?;
    if max_echo_order == 0 {
        return Err(Error::Config("max_echo_order must be at least 1".into()));
    }
    if !(drop_threshold >= 0.0) {
        return Err(Error::Config(format!(
            "drop_threshold must be >= 0, got {drop_threshold}"
        )));
    }
    for th in [theta1_in, theta2_in] {
        if !th.is_finite() {
            return Err(Error::Domain(format!("input area must be finite, got {th}")));
        }
    }

    let w = config.initial_inversion;
    let inputs = |z: f64| {
        [
            mccall_hahn_area(theta1_in, w, z),
            second_pulse_area_in(theta1_in, theta2_in, w, z),
        ]
    };
    let z_grid = config.z_grid();
    let n_echo = max_echo_order as usize;
    let mut system = EchoSystem::new(max_echo_order, config.gamma_tau, w)?;

    let mut echo: Vec<Vec<f64>> = vec![Vec::with_capacity(z_grid.len()); n_echo];
    let mut eta = vec![0.0; n_echo];
    let mut eta_half = vec![0.0; n_echo];
    let mut theta_now = vec![0.0; n_echo];
    let mut theta_half = vec![0.0; n_echo];
    for e in echo.iter_mut() {
        e.push(0.0);
    }

    for win in z_grid.windows(2) {
        let (z, dz) = (win[0], win[1] - win[0]);
        system.step(inputs(z), &theta_now, &eta, dz / 2.0, &mut eta_half);
        eta_to_theta(&eta_half, &mut theta_half);
        let start = eta.clone();
        system.step(inputs(z + dz / 2.0), &theta_half, &start, dz, &mut eta);
        eta_to_theta(&eta, &mut theta_now);
        for (e, t) in echo.iter_mut().zip(&theta_now) {
            e.push(*t);
        }
    }

    let (first, second): (Vec<f64>, Vec<f64>) = z_grid
        .iter()
        .map(|&z| {
            let [a, b] = inputs(z);
            (a, b)
        })
        .unzip();
    let theta_total: Vec<f64> = (0..z_grid.len())
        .map(|j| first[j] + second[j] + echo.iter().map(|e| e[j]).sum::<f64>())
        .collect();
    let mccall_hahn_total = z_grid
        .iter()
        .map(|&z| mccall_hahn_area(theta1_in + theta2_in, w, z))
        .collect();

    let mut labels = vec![PulseLabel::Input(1), PulseLabel::Input(2)];
    let mut theta = vec![first, second];
    for (k, e) in echo.into_iter().enumerate() {
        if e.iter().any(|t| t.abs() > drop_threshold) {
            labels.push(PulseLabel::Echo(k as u8 + 1));
            theta.push(e);
        }
    }

    Ok(AreaTrajectory {
        z_grid,
        labels,
        theta,
        theta_total,
        mccall_hahn_total,
        tracked_echoes: max_echo_order,
    })
}
