use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::ensemble::{EnsembleGrid, MIN_BAND_PRODUCT};
use super::pulse::PulseSpec;
use crate::area::MediumConfig;
use crate::error::{Error, Result};

/// Nodes per reduction chunk. Fixed so that the summation order, and hence
/// every bit of the result, does not depend on the thread count.
const CHUNK: usize = 8;

/// Environment variable capping the worker threads of the oracle.
pub const THREADS_ENV: &str = "ECHO_AREA_THREADS";

const MAX_THREADS: usize = 256;

/// Time and depth sampling of a Maxwell-Bloch run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridResolution {
    pub dt: f64,
    /// Step in αz.
    pub dz: f64,
    pub t_start: f64,
    pub t_end: f64,
}

impl GridResolution {
    /// δt/40 in time, 0.02 in αz, and a window from τ/2 before the first
    /// pulse to τ/2 after echo `max_echo_order`.
    pub fn for_pulses(pulses: &[PulseSpec], max_echo_order: u32) -> Self {
        let shortest = pulses.iter().map(|p| p.duration).fold(f64::INFINITY, f64::min);
        let first = pulses.iter().map(|p| p.center_time).fold(0.0, f64::min);
        let last = pulses.iter().map(|p| p.center_time).fold(0.0, f64::max);
        Self {
            dt: if shortest.is_finite() { shortest / 40.0 } else { 1e-3 },
            dz: 0.02,
            t_start: first - 0.5,
            t_end: (f64::from(max_echo_order) + 1.0).max(last) + 0.5,
        }
    }

    pub fn validate(&self, pulses: &[PulseSpec]) -> Result<()> {
        if !(self.t_end > self.t_start) {
            return Err(Error::Resolution("time window is empty".into()));
        }
        if !(self.dz > 0.0 && self.dz <= 0.02) {
            return Err(Error::Resolution(format!("dz must lie in (0, 0.02], got {}", self.dz)));
        }
        for p in pulses {
            if !(self.dt > 0.0 && self.dt <= p.duration / 20.0) {
                return Err(Error::Resolution(format!(
                    "dt = {} does not resolve a pulse of width {} (need dt <= width/20)",
                    self.dt, p.duration
                )));
            }
        }
        Ok(())
    }

    pub fn time_grid(&self) -> Vec<f64> {
        let n = ((self.t_end - self.t_start) / self.dt).ceil().max(1.0) as usize;
        let h = (self.t_end - self.t_start) / n as f64;
        (0..=n).map(|i| self.t_start + h * i as f64).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Largest `|u² + v² + w² − w_init²|` seen by any atom; only meaningful
    /// without relaxation.
    pub max_norm_error: f64,
    /// Largest `|⟨u⟩|` relative to the largest `|⟨v⟩|`; zero for an even line
    /// and real fields.
    pub u_source_ratio: f64,
    /// Relative error of the weak-pulse source self-test.
    pub calibration_error: f64,
}

/// Field history `omega[i][n]` at depth `z_grid[i]` and retarded time `t_grid[n]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldGrid {
    pub t_grid: Vec<f64>,
    pub z_grid: Vec<f64>,
    pub omega: Vec<Vec<f64>>,
    pub diagnostics: Diagnostics,
}

impl FieldGrid {
    /// Builds a grid from explicit samples, for analysis of external data.
    pub fn from_samples(t_grid: Vec<f64>, z_grid: Vec<f64>, omega: Vec<Vec<f64>>) -> Result<Self> {
        if omega.len() != z_grid.len() || omega.iter().any(|row| row.len() != t_grid.len()) {
            return Err(Error::Config("field samples do not match the grids".into()));
        }
        Ok(Self {
            t_grid,
            z_grid,
            omega,
            diagnostics: Diagnostics::default(),
        })
    }
}

/// Thread pool honouring [`THREADS_ENV`].
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let available = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
        .unwrap_or(available);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.min(MAX_THREADS))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))
}

/// Compensated running sums, one per time sample.
struct Accumulator {
    sum: Vec<f64>,
    comp: Vec<f64>,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Self {
            sum: vec![0.0; n],
            comp: vec![0.0; n],
        }
    }

    #[inline]
    fn add(&mut self, n: usize, x: f64) {
        let s = self.sum[n];
        let t = s + x;
        self.comp[n] += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        self.sum[n] = t;
    }

    fn total(&self) -> Vec<f64> {
        self.sum.iter().zip(&self.comp).map(|(s, c)| s + c).collect()
    }
}

struct SliceSource {
    v: Vec<f64>,
    u: Vec<f64>,
    norm_error: f64,
}

/// Per-atom integrator shared by every slice of one run.
struct Ensemble<'a> {
    grid: &'a EnsembleGrid,
    dt: f64,
    half_decay: f64,
    w_init: f64,
}

impl Ensemble<'_> {
    /// Weighted ⟨v⟩ and ⟨u⟩ over the line for a field history at one depth.
    ///
    /// Each step is split as half precession, resonant rotation by the
    /// step's area, half precession; every piece is an exact rotation, so
    /// the Bloch norm is conserved to rounding without relaxation.
    fn respond(&self, omega: &[f64]) -> SliceSource {
        let steps = omega.len() - 1;
        let rot: Vec<(f64, f64)> = omega
            .windows(2)
            .map(|w| (0.5 * (w[0] + w[1]) * self.dt).sin_cos())
            .collect();
        let chunks: Vec<(Accumulator, Accumulator, f64)> = self
            .grid
            .detunings
            .par_chunks(CHUNK)
            .zip(self.grid.weights.par_chunks(CHUNK))
            .map(|(dets, wts)| {
                let mut acc_v = Accumulator::new(steps + 1);
                let mut acc_u = Accumulator::new(steps + 1);
                let mut norm_error: f64 = 0.0;
                let n0 = self.w_init * self.w_init;
                for (&det, &wt) in dets.iter().zip(wts) {
                    let (ps, pc) = (det * self.dt / 2.0).sin_cos();
                    let (pc, ps) = (pc * self.half_decay, ps * self.half_decay);
                    let (mut u, mut v, mut w) = (0.0f64, 0.0f64, self.w_init);
                    for (n, &(s, c)) in rot.iter().enumerate() {
                        let (u1, v1) = (u * pc - v * ps, u * ps + v * pc);
                        let (v2, w2) = (v1 * c + w * s, w * c - v1 * s);
                        u = u1 * pc - v2 * ps;
                        v = u1 * ps + v2 * pc;
                        w = w2;
                        acc_v.add(n + 1, wt * v);
                        acc_u.add(n + 1, wt * u);
                        norm_error = norm_error.max((u * u + v * v + w * w - n0).abs());
                    }
                }
                (acc_v, acc_u, norm_error)
            })
            .collect();
        let mut v = Accumulator::new(steps + 1);
        let mut u = Accumulator::new(steps + 1);
        let mut norm_error: f64 = 0.0;
        for (cv, cu, ne) in &chunks {
            for (n, (a, b)) in cv.total().into_iter().zip(cu.total()).enumerate() {
                v.add(n, a);
                u.add(n, b);
            }
            norm_error = norm_error.max(*ne);
        }
        SliceSource {
            v: v.total(),
            u: u.total(),
            norm_error,
        }
    }
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => h * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])),
    }
}

/// Solves the reduced Maxwell-Bloch equations in the retarded frame.
///
/// Each depth step integrates every atom under the current field history,
/// then advances `∂Ω/∂(αz) = (1/2π)·Σ weights·v` by the midpoint rule. With
/// weights `G(Δ)dΔ/G(0)` a weak pulse on a broad line loses area as
/// `e^(−αz/2)`; a one-slice version of that limit is checked before the
/// march starts.
pub fn propagate(
    pulses: &[PulseSpec],
    ensemble: &EnsembleGrid,
    medium: &MediumConfig,
    resolution: &GridResolution,
) -> Result<FieldGrid> {
    for p in pulses {
        p.validate()?;
    }
    ensemble.validate()?;
    medium.validate_physics()?;
    resolution.validate(pulses)?;
    let span = resolution.t_end - resolution.t_start;
    if ensemble.revival_time() <= span {
        return Err(Error::Resolution(format!(
            "detuning spacing {} rephases the ensemble after {} < time window {}",
            ensemble.spacing(),
            ensemble.revival_time(),
            span
        )));
    }

    let shortest = pulses.iter().map(|p| p.duration).fold(f64::INFINITY, f64::min);
    if pulses.iter().any(|p| p.area != 0.0) && ensemble.half_span() * shortest < MIN_BAND_PRODUCT {
        return Err(Error::Resolution(format!(
            "detuning band ±{:.1} is narrower than {MIN_BAND_PRODUCT}/δt; use at least {} nodes",
            ensemble.half_span(),
            EnsembleGrid::min_nodes(span, shortest)
        )));
    }

    let t_grid = resolution.time_grid();
    let dt = t_grid[1] - t_grid[0];
    let n_z = (medium.alpha_z_max / resolution.dz).ceil().max(1.0) as usize;
    let dz = medium.alpha_z_max / n_z as f64;
    let z_grid: Vec<f64> = (0..=n_z).map(|i| dz * i as f64).collect();
    let gamma = -medium.gamma_tau.ln();
    let atoms = Ensemble {
        grid: ensemble,
        dt,
        half_decay: (-gamma * dt / 2.0).exp(),
        w_init: medium.initial_inversion,
    };
    let kappa = 1.0 / (2.0 * PI);
    let pool = thread_pool()?;

    pool.install(|| {
        let mut diagnostics = Diagnostics {
            calibration_error: calibrate(&atoms, &t_grid, pulses)?,
            ..Default::default()
        };

        let entrance: Vec<f64> = t_grid
            .iter()
            .map(|&t| pulses.iter().map(|p| p.omega(t)).sum())
            .collect();
        let mut omega = vec![entrance];
        let mut peak_v: f64 = 0.0;
        let mut peak_u: f64 = 0.0;
        for slice in 0..n_z {
            let now = &omega[slice];
            let s0 = atoms.respond(now);
            let half: Vec<f64> = now.iter().zip(&s0.v).map(|(o, v)| o + 0.5 * dz * kappa * v).collect();
            let s1 = atoms.respond(&half);
            let next: Vec<f64> = now.iter().zip(&s1.v).map(|(o, v)| o + dz * kappa * v).collect();
            for s in [&s0, &s1] {
                diagnostics.max_norm_error = diagnostics.max_norm_error.max(s.norm_error);
                peak_v = s.v.iter().fold(peak_v, |m, x| m.max(x.abs()));
                peak_u = s.u.iter().fold(peak_u, |m, x| m.max(x.abs()));
            }
            if let Some(n) = next.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    slice: slice + 1,
                    alpha_z: z_grid[slice + 1],
                    detail: format!("field is {} at t = {}", next[n], t_grid[n]),
                });
            }
            omega.push(next);
        }
        diagnostics.u_source_ratio = if peak_v > 0.0 { peak_u / peak_v } else { 0.0 };

        Ok(FieldGrid {
            t_grid,
            z_grid,
            omega,
            diagnostics,
        })
    })
}

/// Relative error of `∫⟨v⟩dt = π·w_init·θ` for a weak copy of the first
/// pulse, the linear-response identity behind the source normalization.
fn calibrate(atoms: &Ensemble<'_>, t_grid: &[f64], pulses: &[PulseSpec]) -> Result<f64> {
    let Some(first) = pulses.first() else {
        return Ok(0.0);
    };
    if atoms.w_init == 0.0 {
        return Ok(0.0);
    }
    let probe = PulseSpec { area: 1e-4, ..*first };
    let field: Vec<f64> = t_grid.iter().map(|&t| probe.omega(t)).collect();
    let area = trapezoid(&field, atoms.dt);
    let src = atoms.respond(&field);
    let want = PI * atoms.w_init * area;
    let err = (trapezoid(&src.v, atoms.dt) / want - 1.0).abs();
    if err > 0.02 {
        return Err(Error::Resolution(format!(
            "weak-pulse source self-test off by {:.2}%; widen the detuning band or refine dt",
            100.0 * err
        )));
    }
    Ok(err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_is_exact_for_cancellation() {
        let mut a = Accumulator::new(1);
        for x in [1e16, 1.0, -1e16, 1.0] {
            a.add(0, x);
        }
        assert_eq!(a.total()[0], 2.0);
    }

    #[test]
    fn default_resolution_covers_echo_windows() {
        let p = [PulseSpec::sech(1.0, 0.0, 0.025), PulseSpec::sech(2.0, 1.0, 0.025)];
        let r = GridResolution::for_pulses(&p, 2);
        assert_eq!((r.t_start, r.t_end), (-0.5, 3.5));
        assert!(r.validate(&p).is_ok());
        let coarse = GridResolution { dt: 0.01, ..r };
        assert!(matches!(coarse.validate(&p), Err(Error::Resolution(_))));
    }
}
