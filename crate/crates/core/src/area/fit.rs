//! Coherence-decay spectroscopy from primary-echo areas.
//!
//! Each measured area is inverted through the primary-echo formula for
//! `Γ² = e^(−2γm)` at delay multiple `m`; the decay constant then follows from
//! a least-squares line through the origin in `ln Γ²` versus `m`. The Beer-law
//! estimate (echo area ∝ Γ², fitted with a free intercept) is reported next to
//! it because it is what a thin-sample analysis would give.

use serde::Serialize;

use super::closed::{primary_echo_closed, theta2_closed};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Measurement {
    /// Delay in units of the reference delay.
    pub tau_multiple: f64,
    /// Primary-echo area, radians.
    pub echo_area: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitReport {
    /// Fitted survival over one reference delay, `e^(−γτ)`.
    pub gamma_tau: f64,
    /// Fitted `γτ`.
    pub gamma: f64,
    /// Measured minus modelled area at each point, radians.
    pub residuals: Vec<f64>,
    /// Γτ that each point implies on its own.
    pub pointwise_gamma_tau: Vec<f64>,
    /// Thin-sample Beer-law estimate of Γτ.
    pub beer_gamma_tau: f64,
    /// Set when all areas coincide, so the data carry no decay information.
    pub degenerate: bool,
}

pub fn fit_gamma_tau(measurements: &[Measurement], theta1_in: f64, theta2_in: f64, alpha_z: f64) -> Result<FitReport> {
    if measurements.len() < 2 {
        return Err(Error::Fit(format!(
            "need at least 2 measurements, got {}",
            measurements.len()
        )));
    }
    for (i, m) in measurements.iter().enumerate() {
        if !(m.echo_area > 0.0 && m.echo_area < std::f64::consts::PI) {
            return Err(Error::Fit(format!(
                "measurement {}: echo area {} outside (0, pi)",
                i + 1,
                m.echo_area
            )));
        }
        if !(m.tau_multiple > 0.0 && m.tau_multiple.is_finite()) {
            return Err(Error::Fit(format!(
                "measurement {}: delay multiple {} must be positive",
                i + 1,
                m.tau_multiple
            )));
        }
    }
    let theta2_z = theta2_closed(theta1_in, theta2_in, alpha_z);
    let unit = primary_echo_closed(theta1_in, theta2_z, 1.0, alpha_z);
    let gain = (unit / 2.0).tan();
    if !(gain > 0.0 && gain.is_finite()) {
        return Err(Error::Fit(format!(
            "input areas ({theta1_in}, {theta2_in}) at alpha_z = {alpha_z} produce no echo to invert"
        )));
    }

    let ln_g2: Vec<f64> = measurements
        .iter()
        .map(|m| ((m.echo_area / 2.0).tan() / gain).ln())
        .collect();
    let smm: f64 = measurements.iter().map(|m| m.tau_multiple * m.tau_multiple).sum();
    let sml: f64 = measurements.iter().zip(&ln_g2).map(|(m, l)| m.tau_multiple * l).sum();
    let gamma = -sml / (2.0 * smm);
    let gamma_tau = (-gamma).exp();

    let residuals = measurements
        .iter()
        .map(|m| {
            let g = (-gamma * m.tau_multiple).exp();
            m.echo_area - primary_echo_closed(theta1_in, theta2_z, g, alpha_z)
        })
        .collect();
    let pointwise_gamma_tau = measurements
        .iter()
        .zip(&ln_g2)
        .map(|(m, l)| (l / (2.0 * m.tau_multiple)).exp())
        .collect();

    let first = measurements[0].echo_area;
    let degenerate = measurements.iter().all(|m| m.echo_area == first);
    let beer_gamma_tau = if degenerate {
        1.0
    } else {
        let n = measurements.len() as f64;
        let mx = measurements.iter().map(|m| m.tau_multiple).sum::<f64>() / n;
        let my = measurements.iter().map(|m| m.echo_area.ln()).sum::<f64>() / n;
        let sxy: f64 = measurements
            .iter()
            .map(|m| (m.tau_multiple - mx) * (m.echo_area.ln() - my))
            .sum();
        let sxx: f64 = measurements.iter().map(|m| (m.tau_multiple - mx).powi(2)).sum();
        if sxx == 0.0 {
            return Err(Error::Fit("all delays are equal".into()));
        }
        (sxy / sxx / 2.0).exp()
    };

    Ok(FitReport {
        gamma_tau,
        gamma,
        residuals,
        pointwise_gamma_tau,
        beer_gamma_tau,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn synth(gamma_tau: f64, n: usize) -> Vec<Measurement> {
        let (t1, t2, z) = (0.1 * PI, 0.999 * PI, 2.0);
        let t2z = theta2_closed(t1, t2, z);
        (1..=n)
            .map(|m| Measurement {
                tau_multiple: m as f64,
                echo_area: primary_echo_closed(t1, t2z, gamma_tau.powi(m as i32), z),
            })
            .collect()
    }

    #[test]
    fn noiseless_round_trip() {
        let r = fit_gamma_tau(&synth(0.9, 6), 0.1 * PI, 0.999 * PI, 2.0).unwrap();
        assert!((r.gamma_tau - 0.9).abs() < 1e-12);
        assert!(r.residuals.iter().all(|x| x.abs() < 1e-12));
        assert!(!r.degenerate);
        // echo areas are not linear in Γ², so the thin-sample estimate is biased
        assert!((r.beer_gamma_tau - 0.9).abs() > 1e-3);
    }

    #[test]
    fn no_decay_gives_zero_gamma() {
        let r = fit_gamma_tau(&synth(1.0, 4), 0.1 * PI, 0.999 * PI, 2.0).unwrap();
        assert!(r.gamma.abs() < 1e-12);
        assert!(r.degenerate);
    }

    #[test]
    fn rejects_bad_input() {
        let data = synth(0.9, 3);
        assert!(fit_gamma_tau(&data[..1], 0.1 * PI, 0.999 * PI, 2.0).is_err());
        let mut bad = data.clone();
        bad[1].echo_area = 3.5;
        assert!(fit_gamma_tau(&bad, 0.1 * PI, 0.999 * PI, 2.0).is_err());
        assert!(fit_gamma_tau(&data, 0.0, 0.999 * PI, 2.0).is_err());
    }
}
