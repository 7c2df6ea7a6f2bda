//! Symbolic Bloch vector after a sequence of pulses and free evolutions.
//!
//! Each component is a Fourier series in the free-precession phase φ = Δτ:
//! a sum of `P(θ, Γτ) · cos(nφ)` and `P(θ, Γτ) · sin(nφ)` with `n ≥ 0`, where
//! `P` is a [`TrigPoly`]. Negative harmonics are folded into positive ones
//! (`cos(−nφ) = cos nφ`, `sin(−nφ) = −sin nφ`) as soon as they appear, and
//! products `cos nφ · cos φ` etc. are reduced to sums on every evolution step.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_rational::Rational64;

use super::poly::{PulseLabel, TrigMonomial, TrigPoly};
use crate::error::{Error, Result};

/// Phase quadrature of a harmonic term relative to the current time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quadrature {
    Cos,
    Sin,
}

/// One term `coefficient · monomial · {cos, sin}(harmonic · Δτ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicTerm {
    pub monomial: TrigMonomial,
    pub coefficient: Rational64,
    pub harmonic: u32,
    pub quadrature: Quadrature,
}

/// Fourier series in Δτ with symbolic coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HarmonicSeries {
    coeffs: BTreeMap<(u32, Quadrature), TrigPoly>,
}

impl HarmonicSeries {
    fn add(&mut self, harmonic: i64, quadrature: Quadrature, poly: TrigPoly) {
        let (n, poly) = match (harmonic < 0, quadrature) {
            (false, _) => (harmonic as u32, poly),
            (true, Quadrature::Cos) => ((-harmonic) as u32, poly),
            (true, Quadrature::Sin) => ((-harmonic) as u32, -poly),
        };
        if n == 0 && quadrature == Quadrature::Sin {
            return;
        }
        if poly.is_zero() {
            return;
        }
        match self.coeffs.entry((n, quadrature)) {
            Entry::Vacant(e) => {
                e.insert(poly);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += poly;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn merge(&mut self, other: HarmonicSeries) {
        for ((n, q), p) in other.coeffs {
            self.add(n as i64, q, p);
        }
    }

    fn map(&self, f: impl Fn(&TrigPoly) -> TrigPoly) -> HarmonicSeries {
        let mut out = HarmonicSeries::default();
        for (&(n, q), p) in &self.coeffs {
            out.add(n as i64, q, f(p));
        }
        out
    }

    /// Multiplies by cos φ using product-to-sum identities.
    fn times_cos_phi(&self) -> HarmonicSeries {
        let half = Rational64::new(1, 2);
        let mut out = HarmonicSeries::default();
        for (&(n, q), p) in &self.coeffs {
            let n = n as i64;
            let p = p.scale(half);
            // cos nφ cos φ = ½[cos(n−1)φ + cos(n+1)φ]
            // sin nφ cos φ = ½[sin(n−1)φ + sin(n+1)φ]
            out.add(n - 1, q, p.clone());
            out.add(n + 1, q, p);
        }
        out
    }

    /// Multiplies by sin φ using product-to-sum identities.
    fn times_sin_phi(&self) -> HarmonicSeries {
        let half = Rational64::new(1, 2);
        let mut out = HarmonicSeries::default();
        for (&(n, q), p) in &self.coeffs {
            let n = n as i64;
            let p = p.scale(half);
            match q {
                // cos nφ sin φ = ½[sin(n+1)φ − sin(n−1)φ]
                Quadrature::Cos => {
                    out.add(n + 1, Quadrature::Sin, p.clone());
                    out.add(n - 1, Quadrature::Sin, -p);
                }
                // sin nφ sin φ = ½[cos(n−1)φ − cos(n+1)φ]
                Quadrature::Sin => {
                    out.add(n - 1, Quadrature::Cos, p.clone());
                    out.add(n + 1, Quadrature::Cos, -p);
                }
            }
        }
        out
    }

    /// Δ-independent part (harmonic zero).
    pub fn constant_part(&self) -> TrigPoly {
        self.coeffs.get(&(0, Quadrature::Cos)).cloned().unwrap_or_default()
    }

    pub fn get(&self, harmonic: u32, quadrature: Quadrature) -> Option<&TrigPoly> {
        self.coeffs.get(&(harmonic, quadrature))
    }

    pub fn max_gamma_power(&self) -> u32 {
        self.coeffs.values().map(TrigPoly::max_gamma_power).max().unwrap_or(0)
    }

    pub fn max_harmonic(&self) -> u32 {
        self.coeffs.keys().map(|(n, _)| *n).max().unwrap_or(0)
    }

    pub fn terms(&self) -> Vec<HarmonicTerm> {
        self.coeffs
            .iter()
            .flat_map(|(&(harmonic, quadrature), p)| {
                p.terms().map(move |(m, c)| HarmonicTerm {
                    monomial: m.clone(),
                    coefficient: *c,
                    harmonic,
                    quadrature,
                })
            })
            .collect()
    }

    pub fn term_count(&self) -> usize {
        self.coeffs.values().map(TrigPoly::len).sum()
    }

    /// Numeric value at detuning phase φ = Δτ.
    pub fn evaluate(&self, lookup: &impl Fn(PulseLabel) -> Option<f64>, gamma_tau: f64, phase: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (&(n, q), p) in &self.coeffs {
            let angle = n as f64 * phase;
            let h = match q {
                Quadrature::Cos => angle.cos(),
                Quadrature::Sin => angle.sin(),
            };
            acc += h * p.evaluate(lookup, gamma_tau)?;
        }
        Ok(acc)
    }
}

impl std::ops::Add for HarmonicSeries {
    type Output = HarmonicSeries;
    fn add(mut self, rhs: HarmonicSeries) -> HarmonicSeries {
        self.merge(rhs);
        self
    }
}

/// Symbolic Bloch vector built from a pulse sequence with equal delays τ.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolicBlochState {
    pub u: HarmonicSeries,
    pub v: HarmonicSeries,
    pub w: HarmonicSeries,
    /// Labels in application order with the interval count at which each
    /// pulse was applied.
    pulses: Vec<(PulseLabel, u32)>,
    /// Intervals of length τ elapsed since the start of the sequence.
    elapsed: u32,
}

impl SymbolicBlochState {
    pub fn ground() -> Self {
        let mut w = HarmonicSeries::default();
        w.add(0, Quadrature::Cos, TrigPoly::constant(-1));
        Self {
            u: HarmonicSeries::default(),
            v: HarmonicSeries::default(),
            w,
            pulses: Vec::new(),
            elapsed: 0,
        }
    }

    /// Builds `… U(τ) T(θ_b) U(τ) T(θ_a)` acting on the ground state, one unit
    /// interval between consecutive pulses, stopping right after the last one.
    pub fn from_sequence(labels: &[PulseLabel]) -> Result<Self> {
        let mut state = Self::ground();
        for (i, &label) in labels.iter().enumerate() {
            if i > 0 {
                state = symbolic_free_evolve(&state, 1);
            }
            state = symbolic_apply_pulse(&state, label)?;
        }
        Ok(state)
    }

    pub fn pulses(&self) -> impl Iterator<Item = PulseLabel> + '_ {
        self.pulses.iter().map(|(l, _)| *l)
    }

    pub fn pulse_count(&self) -> usize {
        self.pulses.len()
    }

    pub fn elapsed(&self) -> u32 {
        self.elapsed
    }

    fn last_pulse_at(&self) -> Option<u32> {
        self.pulses.last().map(|(_, t)| *t)
    }

    pub fn term_count(&self) -> usize {
        self.u.term_count() + self.v.term_count() + self.w.term_count()
    }

    /// Numeric Bloch vector of the atom with detuning phase φ = Δτ.
    pub fn evaluate(
        &self,
        lookup: &impl Fn(PulseLabel) -> Option<f64>,
        gamma_tau: f64,
        phase: f64,
    ) -> Result<crate::bloch::BlochVector> {
        Ok(crate::bloch::BlochVector::new(
            self.u.evaluate(lookup, gamma_tau, phase)?,
            self.v.evaluate(lookup, gamma_tau, phase)?,
            self.w.evaluate(lookup, gamma_tau, phase)?,
        ))
    }
}

/// Rotation about the u axis by the symbolic area of `label`.
pub fn symbolic_apply_pulse(state: &SymbolicBlochState, label: PulseLabel) -> Result<SymbolicBlochState> {
    if state.pulses().any(|l| l == label) {
        return Err(Error::DuplicateLabel(label));
    }
    let c = TrigPoly::cos(label);
    let s = TrigPoly::sin(label);
    // v' = v cos θ + w sin θ,  w' = −v sin θ + w cos θ
    let v = state.v.map(|p| p * &c) + state.w.map(|p| p * &s);
    let w = state.v.map(|p| -(p * &s)) + state.w.map(|p| p * &c);
    let mut pulses = state.pulses.clone();
    pulses.push((label, state.elapsed));
    Ok(SymbolicBlochState {
        u: state.u.clone(),
        v,
        w,
        pulses,
        elapsed: state.elapsed,
    })
}

/// Free precession and decay over `intervals` delays of length τ.
pub fn symbolic_free_evolve(state: &SymbolicBlochState, intervals: u32) -> SymbolicBlochState {
    let mut u = state.u.clone();
    let mut v = state.v.clone();
    for _ in 0..intervals {
        // u' = Γ(u cos φ − v sin φ),  v' = Γ(u sin φ + v cos φ)
        let mut nu = u.times_cos_phi();
        nu.merge(v.times_sin_phi().map(|p| -p.clone()));
        let mut nv = u.times_sin_phi();
        nv.merge(v.times_cos_phi());
        u = nu.map(|p| p.times_gamma(1));
        v = nv.map(|p| p.times_gamma(1));
    }
    SymbolicBlochState {
        u,
        v,
        w: state.w.clone(),
        pulses: state.pulses.clone(),
        elapsed: state.elapsed + intervals,
    }
}

pub(crate) fn evolve_to(state: &SymbolicBlochState, target: u32) -> Result<SymbolicBlochState> {
    if let Some(t) = state.last_pulse_at() {
        if t >= target {
            return Err(Error::EchoIndex {
                echo_index: target.saturating_sub(1),
                pulses: state.pulse_count(),
            });
        }
    }
    if state.elapsed > target {
        return Err(Error::EchoIndex {
            echo_index: target.saturating_sub(1),
            pulses: state.pulse_count(),
        });
    }
    Ok(symbolic_free_evolve(state, target - state.elapsed))
}
