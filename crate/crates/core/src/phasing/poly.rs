//! Exact polynomials in the trigonometric functions of pulse areas.
//!
//! A [`TrigPoly`] is a finite sum of [`TrigMonomial`]s with rational
//! coefficients. Each monomial is a power of Γτ times, for every pulse label,
//! a factor `cos^k θ` or `sin θ · cos^k θ`. Higher powers of `sin θ` are
//! reduced with `sin²θ = 1 − cos²θ`, which makes the representation canonical:
//! two polynomials describe the same function iff they compare equal.
//! Half-angle forms are sugar on top of this basis
//! (`sin²(θ/2) = (1 − cos θ)/2`, `cos²(θ/2) = (1 + cos θ)/2`).

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name of a pulse in a sequence: an input pulse (`1`, `2`, ...) or an echo
/// pulse re-entering the sequence (`e1`, `e2`, ...).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PulseLabel {
    Input(u8),
    Echo(u8),
}

impl PulseLabel {
    /// Labels of the standard two-pulse excitation followed by the echoes
    /// preceding echo `echo_index`: `1, 2, e1, ..., e(k-1)`.
    pub fn standard_sequence(echo_index: u32) -> Vec<PulseLabel> {
        let mut labels = vec![PulseLabel::Input(1), PulseLabel::Input(2)];
        labels.extend((1..echo_index).map(|k| PulseLabel::Echo(k as u8)));
        labels
    }

    /// Suffix used in shorthand names (`s1`, `ce2`, `S2`, ...).
    pub fn short(&self) -> String {
        match self {
            PulseLabel::Input(i) => format!("{i}"),
            PulseLabel::Echo(k) => format!("e{k}"),
        }
    }
}

impl fmt::Display for PulseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.short())
    }
}

impl std::str::FromStr for PulseLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("not a pulse label: {s:?}"));
        if let Some(rest) = s.strip_prefix('e') {
            rest.parse::<u8>()
                .ok()
                .filter(|k| *k > 0)
                .map(PulseLabel::Echo)
                .ok_or_else(bad)
        } else {
            s.parse::<u8>()
                .ok()
                .filter(|k| *k > 0)
                .map(PulseLabel::Input)
                .ok_or_else(bad)
        }
    }
}

/// Trigonometric dependence of a monomial on one pulse area:
/// `sin^sin_pow θ · cos^cos_pow θ` with `sin_pow ∈ {0, 1}` after reduction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AreaFactor {
    pub label: PulseLabel,
    pub sin_pow: u8,
    pub cos_pow: u8,
}

/// Γτ power times a product of [`AreaFactor`]s, sorted by label.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrigMonomial {
    pub gamma_power: u32,
    factors: Vec<AreaFactor>,
}

impl TrigMonomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn factors(&self) -> &[AreaFactor] {
        &self.factors
    }

    pub fn factor(&self, label: PulseLabel) -> Option<&AreaFactor> {
        self.factors.iter().find(|f| f.label == label)
    }

    fn with_factor(label: PulseLabel, sin_pow: u8, cos_pow: u8) -> Self {
        Self {
            gamma_power: 0,
            factors: vec![AreaFactor {
                label,
                sin_pow,
                cos_pow,
            }],
        }
    }

    /// Product without sine reduction; may contain `sin_pow ≥ 2`.
    fn raw_product(&self, other: &TrigMonomial) -> TrigMonomial {
        let mut factors = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() || j < other.factors.len() {
            match (self.factors.get(i), other.factors.get(j)) {
                (Some(a), Some(b)) if a.label == b.label => {
                    factors.push(AreaFactor {
                        label: a.label,
                        sin_pow: a.sin_pow + b.sin_pow,
                        cos_pow: a.cos_pow + b.cos_pow,
                    });
                    i += 1;
                    j += 1;
                }
                (Some(a), Some(b)) if a.label < b.label => {
                    factors.push(*a);
                    i += 1;
                }
                (Some(_), Some(b)) => {
                    factors.push(*b);
                    j += 1;
                }
                (Some(a), None) => {
                    factors.push(*a);
                    i += 1;
                }
                (None, Some(b)) => {
                    factors.push(*b);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        TrigMonomial {
            gamma_power: self.gamma_power + other.gamma_power,
            factors,
        }
    }

    pub fn labels(&self) -> impl Iterator<Item = PulseLabel> + '_ {
        self.factors.iter().map(|f| f.label)
    }

    pub fn evaluate(&self, lookup: &impl Fn(PulseLabel) -> Option<f64>, gamma_tau: f64) -> Result<f64> {
        let mut value = gamma_tau.powi(self.gamma_power as i32);
        for f in &self.factors {
            let theta = lookup(f.label).ok_or(Error::MissingLabel(f.label))?;
            let (s, c) = theta.sin_cos();
            value *= s.powi(f.sin_pow as i32) * c.powi(f.cos_pow as i32);
        }
        Ok(value)
    }
}

/// Exact sum of trigonometric monomials with rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TrigPoly {
    terms: BTreeMap<TrigMonomial, Rational64>,
}

impl TrigPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<Rational64>) -> Self {
        let mut p = Self::zero();
        p.add_term(TrigMonomial::one(), c.into());
        p
    }

    pub fn sin(label: PulseLabel) -> Self {
        Self::from_monomial(TrigMonomial::with_factor(label, 1, 0))
    }

    pub fn cos(label: PulseLabel) -> Self {
        Self::from_monomial(TrigMonomial::with_factor(label, 0, 1))
    }

    /// `sin²(θ/2) = (1 − cos θ)/2`.
    pub fn sin_half_sq(label: PulseLabel) -> Self {
        (Self::constant(1) - Self::cos(label)).scale(Rational64::new(1, 2))
    }

    /// `cos²(θ/2) = (1 + cos θ)/2`.
    pub fn cos_half_sq(label: PulseLabel) -> Self {
        (Self::constant(1) + Self::cos(label)).scale(Rational64::new(1, 2))
    }

    /// `Γτ^power`.
    pub fn gamma(power: u32) -> Self {
        Self::from_monomial(TrigMonomial {
            gamma_power: power,
            factors: Vec::new(),
        })
    }

    fn from_monomial(m: TrigMonomial) -> Self {
        let mut p = Self::zero();
        p.add_term(m, Rational64::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TrigMonomial, &Rational64)> {
        self.terms.iter()
    }

    pub fn labels(&self) -> Vec<PulseLabel> {
        let mut out: Vec<PulseLabel> = self.terms.keys().flat_map(|m| m.labels()).collect();
        out.sort();
        out.dedup();
        out
    }

    /// Adds `coef · m`, reducing any `sin²` factors first.
    pub fn add_term(&mut self, m: TrigMonomial, coef: Rational64) {
        if coef.is_zero() {
            return;
        }
        if let Some(pos) = m.factors.iter().position(|f| f.sin_pow >= 2) {
            // sin^k = sin^(k-2) (1 - cos^2)
            let mut lower = m.clone();
            lower.factors[pos].sin_pow -= 2;
            let mut with_cos = lower.clone();
            with_cos.factors[pos].cos_pow += 2;
            strip_unit(&mut lower);
            self.add_term(lower, coef);
            self.add_term(with_cos, -coef);
            return;
        }
        let mut m = m;
        strip_unit(&mut m);
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(coef);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += coef;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: Rational64) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), *k * c)).collect(),
        }
    }

    /// Multiplies every term by `Γτ^power`.
    pub fn times_gamma(&self, power: u32) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| {
                    let mut m = m.clone();
                    m.gamma_power += power;
                    (m, *k)
                })
                .collect(),
        }
    }

    pub fn max_gamma_power(&self) -> u32 {
        self.terms.keys().map(|m| m.gamma_power).max().unwrap_or(0)
    }

    /// Part of the polynomial with the given Γτ power, with that power removed.
    pub fn gamma_component(&self, power: u32) -> TrigPoly {
        let mut out = TrigPoly::zero();
        for (m, c) in &self.terms {
            if m.gamma_power == power {
                let mut m = m.clone();
                m.gamma_power = 0;
                out.add_term(m, *c);
            }
        }
        out
    }

    pub fn evaluate(&self, lookup: &impl Fn(PulseLabel) -> Option<f64>, gamma_tau: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            acc += c.to_f64().unwrap_or(f64::NAN) * m.evaluate(lookup, gamma_tau)?;
        }
        Ok(acc)
    }

    /// Plain shorthand form in the canonical `sin`/`cos` basis, e.g.
    /// `G^2*s1 - G^2*s1*c2`.
    pub fn to_shorthand(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut ordered: Vec<_> = self.terms.iter().collect();
        ordered.sort_by_key(|(m, _)| (m.gamma_power, m.factors.len(), (*m).clone()));
        let mut out = String::new();
        for (i, (m, c)) in ordered.into_iter().enumerate() {
            let mut factors = Vec::new();
            if m.gamma_power > 0 {
                factors.push(gamma_str(m.gamma_power));
            }
            for f in &m.factors {
                if f.sin_pow > 0 {
                    factors.push(format!("s{}", f.label));
                }
                match f.cos_pow {
                    0 => {}
                    1 => factors.push(format!("c{}", f.label)),
                    k => factors.push(format!("c{}^{k}", f.label)),
                }
            }
            push_term(&mut out, i == 0, *c, &factors);
        }
        out
    }
}

fn strip_unit(m: &mut TrigMonomial) {
    m.factors.retain(|f| f.sin_pow != 0 || f.cos_pow != 0);
}

pub(crate) fn gamma_str(power: u32) -> String {
    if power == 1 {
        "G".to_string()
    } else {
        format!("G^{power}")
    }
}

pub(crate) fn push_term(out: &mut String, first: bool, coef: Rational64, factors: &[String]) {
    let neg = coef.is_negative();
    let mag = coef.abs();
    if first {
        if neg {
            out.push('-');
        }
    } else {
        out.push_str(if neg { " - " } else { " + " });
    }
    let mut parts = Vec::new();
    if !mag.is_one() || factors.is_empty() {
        parts.push(if mag.is_integer() {
            mag.to_integer().to_string()
        } else {
            format!("{}/{}", mag.numer(), mag.denom())
        });
    }
    parts.extend(factors.iter().cloned());
    out.push_str(&parts.join("*"));
}

impl fmt::Display for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_shorthand())
    }
}

impl Add for TrigPoly {
    type Output = TrigPoly;
    fn add(mut self, rhs: TrigPoly) -> TrigPoly {
        self += rhs;
        self
    }
}

impl<'a> Add<&'a TrigPoly> for &'a TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: &TrigPoly) -> TrigPoly {
        let mut out = self.clone();
        out += rhs.clone();
        out
    }
}

impl AddAssign for TrigPoly {
    fn add_assign(&mut self, rhs: TrigPoly) {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
    }
}

impl Neg for TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        self.scale(-Rational64::one())
    }
}

impl Sub for TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: TrigPoly) -> TrigPoly {
        self + (-rhs)
    }
}

impl<'a> Mul<&'a TrigPoly> for &'a TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: &TrigPoly) -> TrigPoly {
        let mut out = TrigPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.raw_product(mb), *ca * *cb);
            }
        }
        out
    }
}

impl Mul for TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: TrigPoly) -> TrigPoly {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const L1: PulseLabel = PulseLabel::Input(1);
    const L2: PulseLabel = PulseLabel::Input(2);

    #[test]
    fn pythagorean_identity_cancels() {
        let p = &TrigPoly::sin(L1) * &TrigPoly::sin(L1) + &TrigPoly::cos(L1) * &TrigPoly::cos(L1);
        assert_eq!(p, TrigPoly::constant(1));
    }

    #[test]
    fn half_angles_sum_to_one() {
        let p = TrigPoly::sin_half_sq(L2) + TrigPoly::cos_half_sq(L2);
        assert_eq!(p, TrigPoly::constant(1));
    }

    #[test]
    fn double_angle_in_half_angle_basis() {
        // cos θ = cos²(θ/2) − sin²(θ/2)
        assert_eq!(TrigPoly::cos_half_sq(L1) - TrigPoly::sin_half_sq(L1), TrigPoly::cos(L1));
    }

    #[test]
    fn gamma_components_split() {
        let p = TrigPoly::gamma(2) * TrigPoly::sin(L1) + TrigPoly::cos(L2);
        assert_eq!(p.gamma_component(2), TrigPoly::sin(L1));
        assert_eq!(p.gamma_component(0), TrigPoly::cos(L2));
        assert_eq!(p.max_gamma_power(), 2);
    }

    #[test]
    fn evaluate_and_missing_label() {
        let p = TrigPoly::gamma(1) * TrigPoly::sin(L1) * TrigPoly::cos(L2);
        let v = p
            .evaluate(&|l| if l == L1 { Some(0.5) } else { Some(0.25) }, 0.5)
            .unwrap();
        assert!((v - 0.5 * 0.5f64.sin() * 0.25f64.cos()).abs() < 1e-15);
        let err = p.evaluate(&|l| if l == L1 { Some(0.5) } else { None }, 1.0);
        assert!(matches!(err, Err(Error::MissingLabel(l)) if l == L2));
    }

    #[test]
    fn shorthand_rendering() {
        let p = TrigPoly::gamma(2) * TrigPoly::sin(L1) * TrigPoly::sin_half_sq(L2);
        assert_eq!(p.to_shorthand(), "1/2*G^2*s1 - 1/2*G^2*s1*c2");
    }

    #[test]
    fn label_parsing() {
        assert_eq!("e3".parse::<PulseLabel>().unwrap(), PulseLabel::Echo(3));
        assert_eq!("2".parse::<PulseLabel>().unwrap(), L2);
        assert!("x".parse::<PulseLabel>().is_err());
        assert!("e0".parse::<PulseLabel>().is_err());
        assert!(L2 < PulseLabel::Echo(1));
    }
}
