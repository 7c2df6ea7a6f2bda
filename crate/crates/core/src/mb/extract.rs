use serde::Serialize;

use super::propagate::FieldGrid;
use crate::error::{Error, Result};
use crate::phasing::PulseLabel;

/// A window is flagged when the field at either edge exceeds this fraction
/// of the window's peak, i.e. neighbouring pulses have spread into it.
pub const OVERLAP_FRACTION: f64 = 0.01;

/// Windows whose peak is below this fraction of the whole trace's peak hold
/// only stray tails and are never flagged.
const SILENT_FRACTION: f64 = 1e-6;

/// Windowed pulse areas per depth.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EchoAreas {
    pub z_grid: Vec<f64>,
    /// `1`, `2`, then `e1..eK`.
    pub labels: Vec<PulseLabel>,
    /// `areas[i][j]` is the area of `labels[i]` at `z_grid[j]`.
    pub areas: Vec<Vec<f64>>,
    /// Same layout; true where the window edges carry significant field.
    pub flagged: Vec<Vec<bool>>,
}

impl EchoAreas {
    pub fn series(&self, label: PulseLabel) -> Option<&[f64]> {
        let i = self.labels.iter().position(|l| *l == label)?;
        Some(&self.areas[i])
    }
}

fn interpolate(t: &[f64], f: &[f64], x: f64) -> f64 {
    let h = t[1] - t[0];
    let k = (((x - t[0]) / h).floor().max(0.0) as usize).min(t.len() - 2);
    let a = (x - t[k]) / h;
    f[k] * (1.0 - a) + f[k + 1] * a
}

/// `∫ f dt` over `[start, end]` by the trapezoid rule, with the partial
/// cells at both ends integrated on the linear interpolant. Also returns
/// the edge values and the peak `|f|` inside the window.
fn window_integral(t: &[f64], f: &[f64], start: f64, end: f64) -> Result<(f64, f64, f64)> {
    let (t0, t1) = (t[0], t[t.len() - 1]);
    let slack = 1e-9 * (t1 - t0);
    if t.len() < 2 || start < t0 - slack || end > t1 + slack || end <= start {
        return Err(Error::WindowOutOfGrid {
            start,
            end,
            grid_start: t0,
            grid_end: t1,
        });
    }
    let (start, end) = (start.max(t0), end.min(t1));
    let fa = interpolate(t, f, start);
    let fb = interpolate(t, f, end);
    let inner: Vec<usize> = (0..t.len()).filter(|&n| t[n] > start && t[n] < end).collect();
    let mut peak = fa.abs().max(fb.abs());
    let mut sum = 0.0;
    let (mut tp, mut fp) = (start, fa);
    for &n in &inner {
        sum += 0.5 * (t[n] - tp) * (f[n] + fp);
        peak = peak.max(f[n].abs());
        (tp, fp) = (t[n], f[n]);
    }
    sum += 0.5 * (end - tp) * (fb + fp);
    Ok((sum, fa.abs().max(fb.abs()), peak))
}

/// Signed area of `omega` over `[start, end]` and whether the window is flagged.
pub fn window_area(t_grid: &[f64], omega: &[f64], start: f64, end: f64) -> Result<(f64, bool)> {
    let (area, edge, peak) = window_integral(t_grid, omega, start, end)?;
    Ok((area, peak > 0.0 && edge > OVERLAP_FRACTION * peak))
}

/// Areas of both inputs and echoes `e1..e(max_echo_order)` over windows of
/// width τ centred on their nominal times 0, τ, 2τ, ...
pub fn extract_echo_areas(field: &FieldGrid, tau: f64, max_echo_order: u32) -> Result<EchoAreas> {
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("tau must be positive, got {tau}")));
    }
    let mut labels = vec![PulseLabel::Input(1), PulseLabel::Input(2)];
    labels.extend((1..=max_echo_order).map(|k| PulseLabel::Echo(k as u8)));
    let mut areas = Vec::with_capacity(labels.len());
    let mut flagged = Vec::with_capacity(labels.len());
    for (slot, _) in labels.iter().enumerate() {
        let center = slot as f64 * tau;
        let mut a = Vec::with_capacity(field.z_grid.len());
        let mut f = Vec::with_capacity(field.z_grid.len());
        for row in &field.omega {
            let row_peak = row.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let (area, edge, peak) = window_integral(&field.t_grid, row, center - tau / 2.0, center + tau / 2.0)?;
            a.push(area);
            f.push(peak > SILENT_FRACTION * row_peak && edge > OVERLAP_FRACTION * peak);
        }
        areas.push(a);
        flagged.push(f);
    }
    Ok(EchoAreas {
        z_grid: field.z_grid.clone(),
        labels,
        areas,
        flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mb::PulseSpec;
    use std::f64::consts::PI;

    fn grid_with(pulses: &[PulseSpec]) -> FieldGrid {
        let t: Vec<f64> = (0..=4000).map(|n| -0.5 + n as f64 * 1e-3).collect();
        let row = t.iter().map(|&x| pulses.iter().map(|p| p.omega(x)).sum()).collect();
        FieldGrid::from_samples(t, vec![0.0], vec![row]).unwrap()
    }

    #[test]
    fn synthetic_echo_area() {
        let g = grid_with(&[PulseSpec::sech(0.4 * PI, 2.0, 0.025)]);
        let a = extract_echo_areas(&g, 1.0, 2).unwrap();
        let e1 = a.series(PulseLabel::Echo(1)).unwrap()[0];
        assert!((e1 - 0.4 * PI).abs() < 1e-6, "{e1}");
        assert!(a.series(PulseLabel::Echo(2)).unwrap()[0].abs() < 1e-8);
        assert!(a.flagged.iter().flatten().all(|f| !f));
    }

    #[test]
    fn empty_field_and_out_of_grid() {
        let g = grid_with(&[]);
        let a = extract_echo_areas(&g, 1.0, 2).unwrap();
        assert!(a.areas.iter().flatten().all(|x| *x == 0.0));
        assert!(matches!(
            extract_echo_areas(&g, 1.0, 3),
            Err(Error::WindowOutOfGrid { .. })
        ));
    }

    #[test]
    fn broad_pulse_is_flagged() {
        let g = grid_with(&[PulseSpec::sech(1.0, 1.5, 0.05)]);
        let (_, flag) = window_area(&g.t_grid, &g.omega[0], 1.0, 2.0).unwrap();
        assert!(!flag);
        let (_, flag) = window_area(&g.t_grid, &g.omega[0], 1.45, 2.45).unwrap();
        assert!(flag);
    }
}
