use std::collections::BTreeMap;

use num_traits::ToPrimitive;

use super::poly::{PulseLabel, TrigPoly};
use super::render::render_half_angle;
use super::state::{evolve_to, SymbolicBlochState};
use crate::error::{Error, Result};

/// Phasing coherence v₀ and uniform inversion w₀ that drive one echo.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasingSources {
    pub v0_expr: TrigPoly,
    pub w0_expr: TrigPoly,
    pub echo_index: u32,
    /// Emission time t_e = (echo_index + 1)·τ.
    pub emission_time: f64,
    /// Pulses the sources were derived from, in order.
    pub sequence: Vec<PulseLabel>,
}

impl PhasingSources {
    /// Sources of echo `k` after the standard sequence `1, 2, e1, ..., e(k-1)`.
    pub fn for_echo(echo_index: u32) -> Result<Self> {
        if echo_index == 0 {
            return Err(Error::EchoIndex { echo_index, pulses: 2 });
        }
        let state = SymbolicBlochState::from_sequence(&PulseLabel::standard_sequence(echo_index))?;
        extract_phasing(&state, echo_index)
    }

    pub fn labels(&self) -> Vec<PulseLabel> {
        let mut l = self.v0_expr.labels();
        l.extend(self.w0_expr.labels());
        l.sort();
        l.dedup();
        l
    }

    /// Human-readable `v0 = ...` / `w0 = ...` lines in half-angle shorthand.
    pub fn describe(&self) -> String {
        format!(
            "v0 = {}\nw0 = {}",
            render_half_angle(&self.v0_expr),
            render_half_angle(&self.w0_expr)
        )
    }

    pub fn compile(&self, slots: &[PulseLabel]) -> Result<CompiledSources> {
        Ok(CompiledSources {
            v0: CompiledPoly::new(&self.v0_expr, slots)?,
            w0: CompiledPoly::new(&self.w0_expr, slots)?,
        })
    }
}

/// Keeps the Δ-independent parts of the coherence and inversion at the
/// emission time of echo `echo_index`; everything at a nonzero harmonic of Δτ
/// averages out over the inhomogeneous line.
pub fn extract_phasing(state: &SymbolicBlochState, echo_index: u32) -> Result<PhasingSources> {
    let pulses = state.pulse_count();
    if echo_index == 0 || pulses == 0 || (echo_index as usize) + 1 < pulses {
        return Err(Error::EchoIndex { echo_index, pulses });
    }
    let at_echo = evolve_to(state, echo_index + 1)?;
    Ok(PhasingSources {
        v0_expr: at_echo.v.constant_part(),
        w0_expr: at_echo.w.constant_part(),
        echo_index,
        emission_time: f64::from(echo_index + 1),
        sequence: state.pulses().collect(),
    })
}

/// Numeric (v₀, w₀) for the given pulse areas and coherence survival Γτ.
pub fn evaluate_sources(src: &PhasingSources, areas: &BTreeMap<PulseLabel, f64>, gamma_tau: f64) -> Result<(f64, f64)> {
    check_gamma_tau(gamma_tau)?;
    let lookup = |l: PulseLabel| areas.get(&l).copied();
    Ok((
        src.v0_expr.evaluate(&lookup, gamma_tau)?,
        src.w0_expr.evaluate(&lookup, gamma_tau)?,
    ))
}

pub(crate) fn check_gamma_tau(gamma_tau: f64) -> Result<()> {
    if gamma_tau > 0.0 && gamma_tau <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("gamma_tau must lie in (0, 1], got {gamma_tau}")))
    }
}

#[derive(Clone, Copy, Debug)]
struct FlatFactor {
    slot: usize,
    sin: bool,
    cos_pow: u8,
}

#[derive(Clone, Debug)]
struct FlatTerm {
    coef: f64,
    gamma_power: usize,
    factors: Vec<FlatFactor>,
}

#[derive(Clone, Debug)]
struct CompiledPoly {
    terms: Vec<FlatTerm>,
}

impl CompiledPoly {
    fn new(poly: &TrigPoly, slots: &[PulseLabel]) -> Result<Self> {
        let terms = poly
            .terms()
            .map(|(m, c)| {
                let factors = m
                    .factors()
                    .iter()
                    .map(|f| {
                        let slot = slots
                            .iter()
                            .position(|l| *l == f.label)
                            .ok_or(Error::MissingLabel(f.label))?;
                        Ok(FlatFactor {
                            slot,
                            sin: f.sin_pow == 1,
                            cos_pow: f.cos_pow,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(FlatTerm {
                    coef: c.to_f64().unwrap_or(f64::NAN),
                    gamma_power: m.gamma_power as usize,
                    factors,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { terms })
    }

    fn max_gamma_power(&self) -> usize {
        self.terms.iter().map(|t| t.gamma_power).max().unwrap_or(0)
    }

    fn eval(&self, sin: &[f64], cos: &[f64], gamma_pows: &[f64]) -> f64 {
        let mut acc = 0.0;
        for t in &self.terms {
            let mut x = t.coef * gamma_pows[t.gamma_power];
            for f in &t.factors {
                if f.sin {
                    x *= sin[f.slot];
                }
                for _ in 0..f.cos_pow {
                    x *= cos[f.slot];
                }
            }
            acc += x;
        }
        acc
    }
}

/// Floating-point form of [`PhasingSources`] bound to a fixed slot layout,
/// for evaluation inside integration loops.
#[derive(Clone, Debug)]
pub struct CompiledSources {
    v0: CompiledPoly,
    w0: CompiledPoly,
}

impl CompiledSources {
    pub fn max_gamma_power(&self) -> usize {
        self.v0.max_gamma_power().max(self.w0.max_gamma_power())
    }

    /// `sin`, `cos` hold the trigonometric values of each slot's area and
    /// `gamma_pows[k] = Γτ^k` up to [`Self::max_gamma_power`].
    pub fn evaluate(&self, sin: &[f64], cos: &[f64], gamma_pows: &[f64]) -> (f64, f64) {
        (self.v0.eval(sin, cos, gamma_pows), self.w0.eval(sin, cos, gamma_pows))
    }
}
