//! Real-valued multipliers of one real variable.
//!
//! A [`Scalar`] is an expression tree in `x`. The family the engine reasons
//! about exactly is the set of finite sums `c · x^k · e^{a x²}` with rational
//! `a` and natural `k` ("exp-polynomials"); everything the canonical
//! simplifier produces for that family is a sum of such monomials ordered by
//! decreasing growth. Expressions outside the family are kept as trees and
//! simplified locally.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Geometric probe grid `±2^k`, `k = 0..=10`.
pub const PROBE_EXPONENTS: std::ops::RangeInclusive<i32> = 0..=10;

#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Var,
    Const(f64),
    Add(Box<Scalar>, Box<Scalar>),
    Sub(Box<Scalar>, Box<Scalar>),
    Mul(Box<Scalar>, Box<Scalar>),
    Div(Box<Scalar>, Box<Scalar>),
    Pow(Box<Scalar>, Rational64),
    Exp(Box<Scalar>),
    Sqrt(Box<Scalar>),
    Abs(Box<Scalar>),
    Neg(Box<Scalar>),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScalarError {
    #[error("`{node}` is undefined at x = {x}")]
    Domain { node: String, x: f64 },
    #[error("cannot certify `{base}` nonnegative, so the power {power} is not admissible")]
    UncertifiedRoot { base: String, power: Rational64 },
}

/// Result of [`Scalar::growth_class`].
#[derive(Clone, Debug, PartialEq)]
pub enum Growth {
    /// Certified `sup |φ| ≤ bound`.
    Bounded(f64),
    /// Certified unbounded; `witness` holds `(x, |φ(x)|)` samples with
    /// increasing magnitude.
    Unbounded { witness: Vec<(f64, f64)> },
    Unknown,
}

/// Result of [`Scalar::dominates`].
#[derive(Clone, Debug, PartialEq)]
pub enum Dominance {
    Yes,
    /// `|φ| / (1 + |ψ|)` grows along the witness points.
    No { witness: Vec<f64> },
    Unknown,
}

/// Sign certificate from the structural positivity checker.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Nonnegative,
    Unknown,
}

impl Sign {
    pub fn is_nonnegative(self) -> bool {
        matches!(self, Sign::Positive | Sign::Nonnegative)
    }
}

impl Scalar {
    pub fn x() -> Self {
        Scalar::Var
    }

    pub fn constant(c: f64) -> Self {
        Scalar::Const(c)
    }

    /// `e^{a x²}`.
    pub fn gaussian_exp(a: Rational64) -> Self {
        Scalar::from_poly(&ExpPoly::monomial(a, 0, 1.0))
    }

    pub fn exp(self) -> Self {
        Scalar::Exp(Box::new(self))
    }

    pub fn abs(self) -> Self {
        Scalar::Abs(Box::new(self))
    }

    /// Square root; the argument must be certified nonnegative.
    pub fn sqrt(self) -> Result<Self, ScalarError> {
        if !self.sign().is_nonnegative() {
            return Err(ScalarError::UncertifiedRoot {
                base: self.to_string(),
                power: Rational64::new(1, 2),
            });
        }
        Ok(Scalar::Sqrt(Box::new(self)))
    }

    /// Rational power. Non-integer exponents need a nonnegative base.
    pub fn pow(self, power: Rational64) -> Result<Self, ScalarError> {
        if !power.is_integer() && !self.sign().is_nonnegative() {
            return Err(ScalarError::UncertifiedRoot {
                base: self.to_string(),
                power,
            });
        }
        Ok(Scalar::Pow(Box::new(self), power))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.to_poly(), Some(p) if p.is_zero())
    }

    /// True when the expression does not mention `x`.
    pub fn is_constant(&self) -> bool {
        match self {
            Scalar::Var => false,
            Scalar::Const(_) => true,
            Scalar::Add(a, b) | Scalar::Sub(a, b) | Scalar::Mul(a, b) | Scalar::Div(a, b) => {
                a.is_constant() && b.is_constant()
            }
            Scalar::Pow(a, _)
            | Scalar::Exp(a)
            | Scalar::Sqrt(a)
            | Scalar::Abs(a)
            | Scalar::Neg(a) => a.is_constant(),
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, ScalarError> {
        let undefined = |node: &Scalar| ScalarError::Domain {
            node: node.to_string(),
            x,
        };
        Ok(match self {
            Scalar::Var => x,
            Scalar::Const(c) => *c,
            Scalar::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Scalar::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Scalar::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Scalar::Div(a, b) => {
                let den = b.eval(x)?;
                if den == 0.0 {
                    return Err(undefined(self));
                }
                a.eval(x)? / den
            }
            Scalar::Pow(base, r) => {
                let b = base.eval(x)?;
                if r.is_integer() {
                    let n = r.to_integer();
                    if b == 0.0 && n < 0 {
                        return Err(undefined(self));
                    }
                    match i32::try_from(n) {
                        Ok(n) => b.powi(n),
                        Err(_) => b.powf(n as f64),
                    }
                } else {
                    if b < 0.0 || (b == 0.0 && r.is_negative()) {
                        return Err(undefined(self));
                    }
                    b.powf(r.to_f64().unwrap_or(f64::NAN))
                }
            }
            Scalar::Exp(a) => a.eval(x)?.exp(),
            Scalar::Sqrt(a) => {
                let v = a.eval(x)?;
                if v < 0.0 {
                    return Err(undefined(self));
                }
                v.sqrt()
            }
            Scalar::Abs(a) => a.eval(x)?.abs(),
            Scalar::Neg(a) => -a.eval(x)?,
        })
    }

    /// `ln |φ(x)|`, exact for exp-polynomials even where `φ(x)` overflows.
    pub fn log_abs_eval(&self, x: f64) -> Result<f64, ScalarError> {
        let direct = self.eval(x)?;
        if direct.is_finite() {
            return Ok(direct.abs().ln());
        }
        match self.to_poly() {
            Some(p) => Ok(p.log_abs_eval(x)),
            None => Ok(direct.abs().ln()),
        }
    }

    /// Structural positivity certificate.
    pub fn sign(&self) -> Sign {
        use Sign::*;
        let both = |a: Sign, b: Sign| match (a, b) {
            (Positive, Positive) => Positive,
            (Unknown, _) | (_, Unknown) => Unknown,
            _ => Nonnegative,
        };
        match self {
            Scalar::Var => Unknown,
            Scalar::Const(c) if *c > 0.0 => Positive,
            Scalar::Const(c) if *c == 0.0 => Nonnegative,
            Scalar::Const(_) => Unknown,
            Scalar::Exp(_) => Positive,
            Scalar::Abs(a) | Scalar::Sqrt(a) => {
                if a.sign() == Positive {
                    Positive
                } else {
                    Nonnegative
                }
            }
            Scalar::Pow(b, r) => {
                let s = b.sign();
                if s.is_nonnegative() {
                    s
                } else if r.is_integer() && r.to_integer() % 2 == 0 {
                    Nonnegative
                } else {
                    Unknown
                }
            }
            Scalar::Mul(a, b) if a == b => Nonnegative,
            Scalar::Mul(a, b) | Scalar::Div(a, b) => both(a.sign(), b.sign()),
            Scalar::Add(a, b) => match (a.sign(), b.sign()) {
                (Positive, s) | (s, Positive) if s.is_nonnegative() => Positive,
                (Nonnegative, Nonnegative) => Nonnegative,
                _ => Unknown,
            },
            Scalar::Sub(..) | Scalar::Neg(_) => match self.to_poly() {
                Some(p) if p.is_even_nonneg() => {
                    if p.is_zero() {
                        Nonnegative
                    } else {
                        Positive
                    }
                }
                _ => Unknown,
            },
        }
    }

    /// Canonical form. Idempotent; agrees with `self` pointwise.
    pub fn simplify(&self) -> Scalar {
        if let Some(p) = self.to_poly() {
            return Scalar::from_poly(&p);
        }
        let s = |e: &Scalar| Box::new(e.simplify());
        let local = match self {
            Scalar::Var | Scalar::Const(_) => self.clone(),
            Scalar::Add(a, b) => Scalar::Add(s(a), s(b)),
            Scalar::Sub(a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                if a == b {
                    return Scalar::Const(0.0);
                }
                Scalar::Sub(Box::new(a), Box::new(b))
            }
            Scalar::Mul(a, b) => Scalar::Mul(s(a), s(b)),
            Scalar::Div(a, b) => Scalar::Div(s(a), s(b)),
            Scalar::Pow(a, r) => {
                if r.is_zero() {
                    return Scalar::Const(1.0);
                }
                if r.is_one() {
                    return a.simplify();
                }
                Scalar::Pow(s(a), *r)
            }
            Scalar::Exp(a) => Scalar::Exp(s(a)),
            Scalar::Sqrt(a) => {
                let a = a.simplify();
                match a {
                    Scalar::Pow(inner, r) if r == Rational64::from_integer(2) => {
                        Scalar::Abs(inner).simplify()
                    }
                    Scalar::Mul(l, r) if l == r => Scalar::Abs(l).simplify(),
                    other => Scalar::Sqrt(Box::new(other)),
                }
            }
            Scalar::Abs(a) => {
                let a = a.simplify();
                if a.sign().is_nonnegative() {
                    return a;
                }
                match a {
                    Scalar::Abs(_) => a,
                    Scalar::Neg(inner) => Scalar::Abs(inner).simplify(),
                    other => Scalar::Abs(Box::new(other)),
                }
            }
            Scalar::Neg(a) => match a.simplify() {
                Scalar::Neg(inner) => *inner,
                other => Scalar::Neg(Box::new(other)),
            },
        };
        match local.to_poly() {
            Some(p) => Scalar::from_poly(&p),
            None => local,
        }
    }

    /// Bounded / unbounded classification of `|φ|` over ℝ.
    pub fn growth_class(&self) -> Growth {
        let growth = match self.to_poly() {
            Some(p) => p.growth(),
            None => self.tree_growth(),
        };
        match growth {
            Growth::Bounded(m) if !m.is_finite() || !self.samples_respect_bound(m) => {
                Growth::Unknown
            }
            Growth::Unbounded { .. } => Growth::Unbounded {
                witness: self.growth_witness(),
            },
            g => g,
        }
    }

    fn tree_growth(&self) -> Growth {
        use Growth::*;
        let unbounded = || Unbounded { witness: Vec::new() };
        match self {
            Scalar::Var => unbounded(),
            Scalar::Const(c) => Bounded(c.abs()),
            Scalar::Abs(a) | Scalar::Neg(a) => a.growth_class(),
            Scalar::Sqrt(a) => match a.growth_class() {
                Bounded(m) => Bounded(m.sqrt()),
                Unbounded { .. } if a.sign().is_nonnegative() => unbounded(),
                _ => Unknown,
            },
            Scalar::Exp(a) => match a.growth_class() {
                Bounded(m) => Bounded(m.exp()),
                _ => Unknown,
            },
            Scalar::Pow(b, r) => {
                if r.is_zero() {
                    return Bounded(1.0);
                }
                if r.is_negative() {
                    return Unknown;
                }
                match b.growth_class() {
                    Bounded(m) => Bounded(m.powf(r.to_f64().unwrap_or(f64::NAN))),
                    Unbounded { .. } => unbounded(),
                    Unknown => Unknown,
                }
            }
            Scalar::Mul(a, b) => match (a.growth_class(), b.growth_class()) {
                (Bounded(m), Bounded(n)) => Bounded(m * n),
                _ => Unknown,
            },
            Scalar::Add(a, b) | Scalar::Sub(a, b) => match (a.growth_class(), b.growth_class()) {
                (Bounded(m), Bounded(n)) => Bounded(m + n),
                (Bounded(_), Unbounded { .. }) | (Unbounded { .. }, Bounded(_)) => unbounded(),
                _ => Unknown,
            },
            Scalar::Div(..) => Unknown,
        }
    }

    fn probe_points() -> impl Iterator<Item = f64> {
        PROBE_EXPONENTS.flat_map(|k| {
            let x = 2f64.powi(k);
            [x, -x]
        })
    }

    fn samples_respect_bound(&self, bound: f64) -> bool {
        let within = Self::probe_points().all(|x| match self.eval(x) {
            Ok(v) => !v.is_finite() || v.abs() <= bound + 1e-9,
            Err(_) => true,
        });
        within && !self.doubles_three_times()
    }

    /// Sample magnitudes at `x = 2^k` grow by a factor ≥ 2 for three
    /// consecutive `k`.
    fn doubles_three_times(&self) -> bool {
        let values: Vec<Option<f64>> = PROBE_EXPONENTS
            .map(|k| self.eval(2f64.powi(k)).ok().map(f64::abs))
            .collect();
        let mut run = 0;
        for w in values.windows(2) {
            match (w[0], w[1]) {
                (Some(a), Some(b)) if a > 0.0 && b.is_finite() && b >= 2.0 * a => {
                    run += 1;
                    if run >= 3 {
                        return true;
                    }
                }
                _ => run = 0,
            }
        }
        false
    }

    fn growth_witness(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for x in PROBE_EXPONENTS.map(|k| 2f64.powi(k)) {
            for candidate in [x, -x] {
                let Ok(v) = self.eval(candidate) else { continue };
                let v = v.abs();
                if !v.is_finite() {
                    continue;
                }
                if out.last().is_none_or(|&(_, prev)| v > prev) {
                    out.push((candidate, v));
                    break;
                }
            }
        }
        out
    }

    /// Does `|self| ≤ C (1 + |other|)` hold pointwise for some constant `C`?
    pub fn dominates(&self, other: &Scalar) -> Dominance {
        let (phi, psi) = (self.simplify(), other.simplify());
        if phi == psi {
            return Dominance::Yes;
        }
        if let (Some(p), Some(q)) = (phi.to_poly(), psi.to_poly()) {
            let order_p = p.order();
            let order_q = q.order().map_or(ORIGIN, |o| o.max(ORIGIN));
            return match order_p {
                None => Dominance::Yes,
                Some(o) if o <= order_q => Dominance::Yes,
                Some(_) => Dominance::No {
                    witness: ratio_witness(&phi, &psi).unwrap_or_default(),
                },
            };
        }
        if matches!(phi.growth_class(), Growth::Bounded(_)) {
            return Dominance::Yes;
        }
        match ratio_witness(&phi, &psi) {
            Some(w) => Dominance::No { witness: w },
            None => Dominance::Unknown,
        }
    }

    pub(crate) fn to_poly(&self) -> Option<ExpPoly> {
        Some(match self {
            Scalar::Var => ExpPoly::monomial(Rational64::zero(), 1, 1.0),
            Scalar::Const(c) => ExpPoly::constant(*c),
            Scalar::Add(a, b) => a.to_poly()?.add(&b.to_poly()?),
            Scalar::Sub(a, b) => a.to_poly()?.add(&b.to_poly()?.scale(-1.0)),
            Scalar::Neg(a) => a.to_poly()?.scale(-1.0),
            Scalar::Mul(a, b) => a.to_poly()?.mul(&b.to_poly()?),
            Scalar::Div(a, b) => a.to_poly()?.mul(&b.to_poly()?.pow(Rational64::from_integer(-1))?),
            Scalar::Pow(b, r) => b.to_poly()?.pow(*r)?,
            Scalar::Sqrt(b) => b.to_poly()?.pow(Rational64::new(1, 2))?,
            Scalar::Exp(arg) => arg.to_poly()?.exponentiate()?,
            Scalar::Abs(a) => a.to_poly()?.abs()?,
        })
    }

    pub(crate) fn from_poly(p: &ExpPoly) -> Scalar {
        let mut acc: Option<Scalar> = None;
        for (&(a, k), &c) in p.terms.iter().rev() {
            let mono = monomial_tree(a, k, c.abs());
            acc = Some(match acc {
                None if c == -1.0 || (c < 0.0 && k == 0 && a.is_zero()) => Scalar::Neg(Box::new(mono)),
                None if c < 0.0 => monomial_tree(a, k, c),
                None => mono,
                Some(prev) if c < 0.0 => Scalar::Sub(Box::new(prev), Box::new(mono)),
                Some(prev) => Scalar::Add(Box::new(prev), Box::new(mono)),
            });
        }
        acc.unwrap_or(Scalar::Const(0.0))
    }
}

const ORIGIN: (Rational64, u32) = (Rational64::ZERO, 0);

fn ratio_witness(phi: &Scalar, psi: &Scalar) -> Option<Vec<f64>> {
    let samples: Vec<(f64, f64)> = PROBE_EXPONENTS
        .map(|k| 2f64.powi(k))
        .filter_map(|x| {
            let a = phi.eval(x).ok()?.abs();
            let b = psi.eval(x).ok()?.abs();
            let r = a / (1.0 + b);
            r.is_finite().then_some((x, r))
        })
        .collect();
    let mut run: Vec<f64> = Vec::new();
    for w in samples.windows(2) {
        if w[0].1 > 0.0 && w[1].1 >= 2.0 * w[0].1 {
            if run.is_empty() {
                run.push(w[0].0);
            }
            run.push(w[1].0);
        } else if run.len() >= 4 {
            break;
        } else {
            run.clear();
        }
    }
    (run.len() >= 4).then_some(run)
}

fn monomial_tree(a: Rational64, k: u32, c: f64) -> Scalar {
    let mut factors: Vec<Scalar> = Vec::new();
    if k == 1 {
        factors.push(Scalar::Var);
    } else if k > 1 {
        factors.push(Scalar::Pow(Box::new(Scalar::Var), Rational64::from_integer(k as i64)));
    }
    if !a.is_zero() {
        factors.push(Scalar::Exp(Box::new(exponent_tree(a))));
    }
    let mut tree = match factors.len() {
        0 => return Scalar::Const(c),
        _ => factors
            .into_iter()
            .reduce(|l, r| Scalar::Mul(Box::new(l), Box::new(r)))
            .expect("nonempty"),
    };
    if c != 1.0 {
        tree = Scalar::Mul(Box::new(Scalar::Const(c)), Box::new(tree));
    }
    tree
}

/// `a · x²` rendered as `x^2`, `2*x^2`, `x^2/4`, `3*x^2/4`, `-x^2/2`.
fn exponent_tree(a: Rational64) -> Scalar {
    let square = Scalar::Pow(Box::new(Scalar::Var), Rational64::from_integer(2));
    let num = a.numer().abs();
    let den = *a.denom();
    let neg = a.is_negative();
    let mut t = match (num, neg) {
        (1, false) => square,
        (1, true) => Scalar::Neg(Box::new(square)),
        (n, _) => {
            let c = if neg { -(n as f64) } else { n as f64 };
            Scalar::Mul(Box::new(Scalar::Const(c)), Box::new(square))
        }
    };
    if den != 1 {
        t = Scalar::Div(Box::new(t), Box::new(Scalar::Const(den as f64)));
    }
    t
}

/// Sum of monomials `c · x^k · e^{a x²}`, keyed by `(a, k)`.
#[derive(Clone, Debug, PartialEq, Default)]
pub(crate) struct ExpPoly {
    pub(crate) terms: BTreeMap<(Rational64, u32), f64>,
}

const MAX_INTEGER_POWER: i64 = 64;

impl ExpPoly {
    fn constant(c: f64) -> Self {
        Self::monomial(Rational64::zero(), 0, c)
    }

    fn monomial(a: Rational64, k: u32, c: f64) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert((a, k), c);
        }
        ExpPoly { terms }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn single(&self) -> Option<(Rational64, u32, f64)> {
        if self.terms.len() != 1 {
            return None;
        }
        self.terms.iter().next().map(|(&(a, k), &c)| (a, k, c))
    }

    fn is_even_nonneg(&self) -> bool {
        self.terms.iter().all(|(&(_, k), &c)| k % 2 == 0 && c > 0.0)
    }

    /// Dominant `(a, k)` at infinity.
    fn order(&self) -> Option<(Rational64, u32)> {
        self.terms.keys().next_back().copied()
    }

    fn add(&self, other: &ExpPoly) -> ExpPoly {
        let mut terms = self.terms.clone();
        for (key, c) in &other.terms {
            let entry = terms.entry(*key).or_insert(0.0);
            *entry += c;
        }
        terms.retain(|_, c| *c != 0.0);
        ExpPoly { terms }
    }

    fn scale(&self, s: f64) -> ExpPoly {
        let mut terms: BTreeMap<_, _> = self.terms.iter().map(|(k, c)| (*k, c * s)).collect();
        terms.retain(|_, c| *c != 0.0);
        ExpPoly { terms }
    }

    fn mul(&self, other: &ExpPoly) -> ExpPoly {
        let mut out = ExpPoly::default();
        for (&(a1, k1), c1) in &self.terms {
            for (&(a2, k2), c2) in &other.terms {
                out = out.add(&ExpPoly::monomial(a1 + a2, k1 + k2, c1 * c2));
            }
        }
        out
    }

    fn pow(&self, r: Rational64) -> Option<ExpPoly> {
        if r.is_integer() && !r.is_negative() {
            let n = r.to_integer();
            if n > MAX_INTEGER_POWER {
                return None;
            }
            let mut out = ExpPoly::constant(1.0);
            for _ in 0..n {
                out = out.mul(self);
            }
            return Some(out);
        }
        let (a, k, c) = self.single()?;
        if k == 0 {
            if !r.is_integer() && c <= 0.0 {
                return None;
            }
            let c = if r.is_integer() {
                c.powi(r.to_integer() as i32)
            } else {
                c.powf(r.to_f64()?)
            };
            return Some(ExpPoly::monomial(a * r, 0, c));
        }
        // x^k survives only as a natural even power with a positive coefficient
        let kr = r * Rational64::from_integer(k as i64);
        if kr.is_integer() && !kr.is_negative() && kr.to_integer() % 2 == 0 && k % 2 == 0 && c > 0.0
        {
            return Some(ExpPoly::monomial(a * r, kr.to_integer() as u32, c.powf(r.to_f64()?)));
        }
        None
    }

    fn exponentiate(&self) -> Option<ExpPoly> {
        let mut a = Rational64::zero();
        let mut shift = 0.0;
        for (&(ea, k), &c) in &self.terms {
            match (ea.is_zero(), k) {
                (true, 0) => shift = c,
                (true, 2) => a = exact_rational(c)?,
                _ => return None,
            }
        }
        Some(ExpPoly::monomial(a, 0, shift.exp()))
    }

    fn abs(&self) -> Option<ExpPoly> {
        if let Some((a, k, c)) = self.single() {
            if k % 2 == 0 {
                return Some(ExpPoly::monomial(a, k, c.abs()));
            }
            return None;
        }
        self.is_even_nonneg().then(|| self.clone())
    }

    fn growth(&self) -> Growth {
        let Some(order) = self.order() else {
            return Growth::Bounded(0.0);
        };
        if order.cmp(&ORIGIN) == Ordering::Greater {
            return Growth::Unbounded { witness: Vec::new() };
        }
        let bound = self
            .terms
            .iter()
            .map(|(&(a, k), &c)| {
                if k == 0 {
                    return c.abs();
                }
                // sup x^k e^{a x²} for a < 0 sits at x² = k / (2|a|)
                let a = a.abs().to_f64().unwrap_or(f64::NAN);
                let k = k as f64;
                c.abs() * (k / (2.0 * a)).powf(k / 2.0) * (-k / 2.0).exp()
            })
            .sum();
        Growth::Bounded(bound)
    }

    fn log_abs_eval(&self, x: f64) -> f64 {
        // log-sum-exp over the signed terms
        let logs: Vec<(f64, f64)> = self
            .terms
            .iter()
            .map(|(&(a, k), &c)| {
                let a = a.to_f64().unwrap_or(f64::NAN);
                let sign = c.signum() * if k % 2 == 1 && x < 0.0 { -1.0 } else { 1.0 };
                (sign, c.abs().ln() + k as f64 * x.abs().ln() + a * x * x)
            })
            .collect();
        let top = logs.iter().map(|&(_, l)| l).fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return top;
        }
        let s: f64 = logs.iter().map(|&(sg, l)| sg * (l - top).exp()).sum();
        top + s.abs().ln()
    }
}

/// `c` as a rational when the conversion is exact.
pub(crate) fn exact_rational(c: f64) -> Option<Rational64> {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        return Some(Rational64::from_integer(c as i64));
    }
    let r = Rational64::approximate_float(c)?;
    (r.to_f64()? == c).then_some(r)
}

fn fmt_const(c: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        write!(f, "{}", c as i64)
    } else {
        write!(f, "{c}")
    }
}

fn fmt_rational(r: Rational64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() && !r.is_negative() {
        write!(f, "{}", r.numer())
    } else if r.is_integer() {
        write!(f, "({})", r.numer())
    } else {
        write!(f, "({}/{})", r.numer(), r.denom())
    }
}

impl Scalar {
    fn precedence(&self) -> u8 {
        match self {
            Scalar::Add(..) | Scalar::Sub(..) => 1,
            Scalar::Mul(..) | Scalar::Div(..) => 2,
            Scalar::Neg(_) => 3,
            Scalar::Pow(..) => 4,
            Scalar::Const(c) if *c < 0.0 => 3,
            _ => 5,
        }
    }

    fn fmt_child(&self, child: &Scalar, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if child.precedence() < min {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Var => write!(f, "x"),
            Scalar::Const(c) => fmt_const(*c, f),
            Scalar::Add(a, b) => {
                self.fmt_child(a, 1, f)?;
                write!(f, " + ")?;
                self.fmt_child(b, 2, f)
            }
            Scalar::Sub(a, b) => {
                self.fmt_child(a, 1, f)?;
                write!(f, " - ")?;
                self.fmt_child(b, 2, f)
            }
            Scalar::Mul(a, b) => {
                self.fmt_child(a, 2, f)?;
                write!(f, "*")?;
                self.fmt_child(b, 3, f)
            }
            Scalar::Div(a, b) => {
                self.fmt_child(a, 2, f)?;
                write!(f, "/")?;
                self.fmt_child(b, 3, f)
            }
            Scalar::Neg(a) => {
                write!(f, "-")?;
                self.fmt_child(a, 3, f)
            }
            Scalar::Pow(b, r) => {
                self.fmt_child(b, 5, f)?;
                write!(f, "^")?;
                fmt_rational(*r, f)
            }
            Scalar::Exp(a) => write!(f, "exp({a})"),
            Scalar::Sqrt(a) => write!(f, "sqrt({a})"),
            Scalar::Abs(a) => write!(f, "abs({a})"),
        }
    }
}

impl std::ops::Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        Scalar::Add(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        Scalar::Sub(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        Scalar::Mul(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Div for Scalar {
    type Output = Scalar;
    fn div(self, rhs: Scalar) -> Scalar {
        Scalar::Div(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::Neg(Box::new(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    fn gauss(n: i64, d: i64) -> Scalar {
        (Scalar::constant(n as f64 / d as f64) * Scalar::x().pow(r(2, 1)).unwrap()).exp()
    }

    fn phi() -> Scalar {
        gauss(1, 1)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(phi().eval(0.0).unwrap(), 1.0);
        let e4 = 4f64.exp();
        assert!((phi().eval(2.0).unwrap() - e4).abs() / e4 < 1e-15);
        let c = phi().pow(r(2, 1)).unwrap() - phi().sqrt().unwrap();
        assert_eq!(c.eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn eval_reports_offending_node() {
        let e = Scalar::constant(1.0) / Scalar::x();
        match e.eval(0.0) {
            Err(ScalarError::Domain { node, .. }) => assert_eq!(node, "1/x"),
            other => panic!("expected domain error, got {other:?}"),
        }
        assert!(Scalar::x().sqrt().is_err());
        assert!(Scalar::x().pow(r(1, 3)).is_err());
        assert!(Scalar::x().pow(r(2, 1)).is_ok());
    }

    #[test]
    fn growth_examples() {
        assert!(matches!(phi().growth_class(), Growth::Unbounded { .. }));
        assert_eq!(Scalar::constant(0.0).growth_class(), Growth::Bounded(0.0));
        let c = phi().pow(r(2, 1)).unwrap() - phi().sqrt().unwrap();
        match c.growth_class() {
            Growth::Unbounded { witness } => {
                assert!(witness.len() >= 3);
                assert!(witness.windows(2).all(|w| w[1].1 > w[0].1));
            }
            g => panic!("{g:?}"),
        }
        match gauss(-1, 2).growth_class() {
            Growth::Bounded(m) => assert!((m - 1.0).abs() < 1e-15),
            g => panic!("{g:?}"),
        }
        // sup x² e^{-x²} = 1/e
        let bump = Scalar::x().pow(r(2, 1)).unwrap() * gauss(-1, 1);
        match bump.growth_class() {
            Growth::Bounded(m) => assert!((m - (-1f64).exp()).abs() < 1e-15),
            g => panic!("{g:?}"),
        }
    }

    #[test]
    fn dominance_examples() {
        assert_eq!(gauss(1, 4).dominates(&phi()), Dominance::Yes);
        match phi().dominates(&gauss(1, 4)) {
            Dominance::No { witness } => assert_eq!(&witness[..4], &[1.0, 2.0, 4.0, 8.0]),
            d => panic!("{d:?}"),
        }
        let sqrt_phi = phi().sqrt().unwrap();
        let phi_sq = phi().pow(r(2, 1)).unwrap();
        assert_eq!(sqrt_phi.dominates(&phi_sq), Dominance::Yes);
        // bounded functions are dominated by anything
        assert_eq!(gauss(-1, 1).dominates(&Scalar::constant(0.0)), Dominance::Yes);
        assert!(matches!(
            Scalar::x().dominates(&Scalar::constant(0.0)),
            Dominance::No { .. }
        ));
    }

    #[test]
    fn simplify_examples() {
        assert_eq!((phi() * phi()).simplify(), gauss(2, 1).simplify());
        assert_eq!((phi() * phi()).simplify().to_string(), "exp(2*x^2)");
        let inner = gauss(1, 2).sqrt().unwrap().pow(r(2, 1)).unwrap();
        assert_eq!(inner.simplify().to_string(), "exp(x^2/2)");
        assert_eq!((phi() - phi()).simplify(), Scalar::Const(0.0));
        let c = phi().pow(r(2, 1)).unwrap() - phi().sqrt().unwrap();
        assert_eq!(c.simplify().to_string(), "exp(2*x^2) - exp(x^2/2)");
        assert_eq!(phi().pow(r(-1, 2)).unwrap().simplify().to_string(), "exp(-x^2/2)");
    }

    #[test]
    fn simplify_outside_family() {
        let e = Scalar::x().pow(r(2, 1)).unwrap().sqrt().unwrap();
        assert_eq!(e.simplify(), Scalar::Abs(Box::new(Scalar::Var)));
        let d = Scalar::constant(1.0) / (Scalar::constant(1.0) + Scalar::x().pow(r(2, 1)).unwrap());
        assert_eq!(d.simplify().simplify(), d.simplify());
        assert!(matches!(d.simplify().growth_class(), Growth::Unknown));
    }

    #[test]
    fn positivity() {
        assert_eq!(phi().sign(), Sign::Positive);
        assert_eq!(Scalar::x().abs().sign(), Sign::Nonnegative);
        assert_eq!(Scalar::x().sign(), Sign::Unknown);
        assert_eq!((phi() - gauss(1, 2)).sign(), Sign::Unknown);
        assert_eq!(Scalar::x().pow(r(4, 1)).unwrap().sign(), Sign::Nonnegative);
    }

    #[test]
    fn log_abs_survives_overflow() {
        let big = gauss(2, 1);
        let x = 30.0;
        assert!(big.eval(x).unwrap().is_infinite());
        assert!((big.log_abs_eval(x).unwrap() - 1800.0).abs() < 1e-9);
    }
}
