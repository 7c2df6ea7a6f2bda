use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseShape {
    Sech,
    Rectangular,
    Gaussian,
}

/// Input pulse at the medium entrance. Times are in units of τ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    /// Signed area, radians.
    pub area: f64,
    pub center_time: f64,
    /// Width δt: sech parameter, full length of the rectangle, or Gaussian σ.
    pub duration: f64,
    pub shape: PulseShape,
}

impl PulseSpec {
    pub fn sech(area: f64, center_time: f64, duration: f64) -> Self {
        Self {
            area,
            center_time,
            duration,
            shape: PulseShape::Sech,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration <= 0.1) {
            return Err(Error::Config(format!(
                "pulse duration must lie in (0, tau/10], got {}",
                self.duration
            )));
        }
        if !self.area.is_finite() || !self.center_time.is_finite() {
            return Err(Error::Config("pulse area and center must be finite".into()));
        }
        Ok(())
    }

    /// Rabi frequency at time `t`; integrates to `area`.
    pub fn omega(&self, t: f64) -> f64 {
        let x = (t - self.center_time) / self.duration;
        match self.shape {
            PulseShape::Sech => self.area / (PI * self.duration) / x.cosh(),
            PulseShape::Rectangular => {
                if x.abs() <= 0.5 {
                    self.area / self.duration
                } else {
                    0.0
                }
            }
            PulseShape::Gaussian => self.area / (self.duration * (2.0 * PI).sqrt()) * (-0.5 * x * x).exp(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_integrate_to_area() {
        for shape in [PulseShape::Sech, PulseShape::Gaussian, PulseShape::Rectangular] {
            let p = PulseSpec {
                area: 0.7,
                center_time: 1.0,
                duration: 0.025,
                shape,
            };
            let dt = 1e-5;
            let s: f64 = (0..200_000).map(|i| p.omega(i as f64 * dt + dt / 2.0) * dt).sum();
            assert!((s - 0.7).abs() < 1e-6, "{shape:?}: {s}");
        }
    }

    #[test]
    fn duration_bound() {
        assert!(PulseSpec::sech(1.0, 0.0, 0.2).validate().is_err());
        assert!(PulseSpec::sech(1.0, 0.0, 0.025).validate().is_ok());
    }
}
