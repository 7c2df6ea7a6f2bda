//! Half-angle rendering of symbolic sources.
//!
//! The canonical `sin`/`cos` basis is compact for arithmetic but hides the
//! `sin²(θ/2)` factors that make echo sources readable. For every label whose
//! cosine dependence is linear, `a + b·cos θ` may equally be written
//! `(a+b)·cos²(θ/2) + (a−b)·sin²(θ/2)`; the renderer picks, label by label,
//! whichever choice yields fewer terms.
//!
//! Notation: `s1 = sin θ₁`, `c1 = cos θ₁`, `S1 = sin²(θ₁/2)`, `C1 = cos²(θ₁/2)`,
//! `G^n = Γτⁿ`.

use std::collections::BTreeMap;

use num_rational::Rational64;
use num_traits::{One, Zero};

use super::poly::{gamma_str, push_term, PulseLabel, TrigPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Factor {
    Sin(PulseLabel),
    Cos(PulseLabel, u8),
    SinHalfSq(PulseLabel),
    CosHalfSq(PulseLabel),
}

impl Factor {
    fn label(&self) -> PulseLabel {
        match *self {
            Factor::Sin(l) | Factor::Cos(l, _) | Factor::SinHalfSq(l) | Factor::CosHalfSq(l) => l,
        }
    }

    fn render(&self) -> String {
        match *self {
            Factor::Sin(l) => format!("s{l}"),
            Factor::Cos(l, 1) => format!("c{l}"),
            Factor::Cos(l, k) => format!("c{l}^{k}"),
            Factor::SinHalfSq(l) => format!("S{l}"),
            Factor::CosHalfSq(l) => format!("C{l}"),
        }
    }
}

type Term = (Rational64, Vec<Factor>);

/// A polynomial in the cosines and sines of `labels`, stored as
/// `(cos exponents, sin exponents) → coefficient` over those labels only.
type Table = BTreeMap<Vec<(u8, u8)>, Rational64>;

fn table_of(poly: &TrigPoly, labels: &[PulseLabel]) -> Table {
    let mut t = Table::new();
    for (m, c) in poly.terms() {
        let key: Vec<(u8, u8)> = labels
            .iter()
            .map(|l| m.factor(*l).map(|f| (f.cos_pow, f.sin_pow)).unwrap_or((0, 0)))
            .collect();
        *t.entry(key).or_insert_with(Rational64::zero) += *c;
    }
    t.retain(|_, c| !c.is_zero());
    t
}

fn add_tables(a: &Table, b: &Table, sign: Rational64) -> Table {
    let mut out = a.clone();
    for (k, c) in b {
        *out.entry(k.clone()).or_insert_with(Rational64::zero) += *c * sign;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn render_table(table: &Table, labels: &[PulseLabel]) -> Vec<Term> {
    if table.is_empty() {
        return Vec::new();
    }
    let Some((&label, rest)) = labels.split_first() else {
        let c = table.values().copied().fold(Rational64::zero(), |a, b| a + b);
        return vec![(c, Vec::new())];
    };

    // split on this label's (cos, sin) exponents
    let mut by_exp: BTreeMap<(u8, u8), Table> = BTreeMap::new();
    for (k, c) in table {
        by_exp.entry(k[0]).or_default().insert(k[1..].to_vec(), *c);
    }

    let mut out = Vec::new();
    for sin_pow in [0u8, 1] {
        let parts: BTreeMap<u8, &Table> = by_exp
            .iter()
            .filter(|((_, s), _)| *s == sin_pow)
            .map(|((c, _), t)| (*c, t))
            .collect();
        if parts.is_empty() {
            continue;
        }
        let prefix: Vec<Factor> = if sin_pow == 1 {
            vec![Factor::Sin(label)]
        } else {
            Vec::new()
        };

        let mut plain = Vec::new();
        for (&cos_pow, t) in &parts {
            let mut f = prefix.clone();
            if cos_pow > 0 {
                f.push(Factor::Cos(label, cos_pow));
            }
            plain.extend(prepend(&f, render_table(t, rest)));
        }

        let linear = parts.keys().all(|&k| k <= 1);
        let chosen = if linear {
            let empty = Table::new();
            let p0 = parts.get(&0).copied().unwrap_or(&empty);
            let p1 = parts.get(&1).copied().unwrap_or(&empty);
            let mut half = Vec::new();
            let mut fc = prefix.clone();
            fc.push(Factor::CosHalfSq(label));
            half.extend(prepend(&fc, render_table(&add_tables(p0, p1, Rational64::one()), rest)));
            let mut fs = prefix.clone();
            fs.push(Factor::SinHalfSq(label));
            half.extend(prepend(
                &fs,
                render_table(&add_tables(p0, p1, -Rational64::one()), rest),
            ));
            if half.len() < plain.len() {
                half
            } else {
                plain
            }
        } else {
            plain
        };
        out.extend(chosen);
    }
    out
}

fn prepend(prefix: &[Factor], terms: Vec<Term>) -> Vec<Term> {
    terms
        .into_iter()
        .map(|(c, f)| {
            let mut all = prefix.to_vec();
            all.extend(f);
            (c, all)
        })
        .collect()
}

/// Renders `poly` in the paper-style shorthand, grouping by powers of Γτ.
pub fn render_half_angle(poly: &TrigPoly) -> String {
    if poly.is_zero() {
        return "0".to_string();
    }
    let labels = poly.labels();
    let mut out = String::new();
    let mut first = true;
    for power in 0..=poly.max_gamma_power() {
        let part = poly.gamma_component(power);
        if part.is_zero() {
            continue;
        }
        let mut terms = render_table(&table_of(&part, &labels), &labels);
        terms.retain(|(c, _)| !c.is_zero());
        for (c, mut factors) in terms {
            factors.sort_by_key(|f| f.label());
            let mut names = Vec::new();
            if power > 0 {
                names.push(gamma_str(power));
            }
            names.extend(factors.iter().map(Factor::render));
            push_term(&mut out, first, c, &names);
            first = false;
        }
    }
    out
}
