//! Operator expression trees and symbolic domain descriptors.

use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

use crate::scalar::Scalar;

/// Declared properties of an abstract operator symbol.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Props {
    pub selfadjoint: bool,
    pub positive: bool,
    pub unbounded: bool,
    pub bounded: bool,
    pub closed: bool,
    pub densely_defined: bool,
    /// Injective with an (arbitrary) inverse.
    pub invertible: bool,
    pub boundedly_invertible: bool,
    /// Invertible with an unbounded inverse.
    pub unbounded_inverse: bool,
}

pub const PROP_NAMES: &[&str] = &[
    "selfadjoint",
    "positive",
    "unbounded",
    "bounded",
    "closed",
    "densely_defined",
    "invertible",
    "boundedly_invertible",
    "unbounded_inverse",
];

impl Props {
    pub fn set(&mut self, name: &str) -> bool {
        match name {
            "selfadjoint" => self.selfadjoint = true,
            "positive" => self.positive = true,
            "unbounded" => self.unbounded = true,
            "bounded" => self.bounded = true,
            "closed" => self.closed = true,
            "densely_defined" => self.densely_defined = true,
            "invertible" => self.invertible = true,
            "boundedly_invertible" => self.boundedly_invertible = true,
            "unbounded_inverse" => self.unbounded_inverse = true,
            _ => return false,
        }
        true
    }

    /// Close the set under the obvious implications.
    pub fn saturate(mut self) -> Self {
        if self.positive {
            self.selfadjoint = true;
        }
        if self.selfadjoint {
            self.closed = true;
            self.densely_defined = true;
        }
        if self.boundedly_invertible || self.unbounded_inverse {
            self.invertible = true;
        }
        self
    }

    pub fn names(&self) -> Vec<&'static str> {
        let flags = [
            self.selfadjoint,
            self.positive,
            self.unbounded,
            self.bounded,
            self.closed,
            self.densely_defined,
            self.invertible,
            self.boundedly_invertible,
            self.unbounded_inverse,
        ];
        PROP_NAMES
            .iter()
            .zip(flags)
            .filter_map(|(n, f)| f.then_some(*n))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxiomSym {
    pub name: String,
    pub props: Props,
}

impl AxiomSym {
    pub fn new(name: impl Into<String>, props: Props) -> Arc<Self> {
        Arc::new(AxiomSym {
            name: name.into(),
            props: props.saturate(),
        })
    }
}

/// `C^power`, or `|C|^power` when `modulus` is set.
#[derive(Clone, Debug, PartialEq)]
pub struct AxiomPower {
    pub sym: Arc<AxiomSym>,
    pub power: Rational64,
    pub modulus: bool,
}

impl AxiomPower {
    pub fn new(sym: Arc<AxiomSym>, power: Rational64, modulus: bool) -> Self {
        AxiomPower { sym, power, modulus }.canonical()
    }

    /// The modulus flag is dropped where it changes nothing: positive
    /// symbols and even integer powers.
    pub fn canonical(mut self) -> Self {
        if self.sym.props.positive || is_even_integer(self.power) {
            self.modulus = false;
        }
        self
    }
}

pub(crate) fn is_even_integer(r: Rational64) -> bool {
    r.is_integer() && r.to_integer() % 2 == 0
}

#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    Mult(Scalar),
    /// `𝓕* T 𝓕`.
    Fourier(Box<Op>),
    /// Bare unitary transform; `inverse` selects `𝓕*`.
    Transform { inverse: bool },
    Block(Vec<Vec<Op>>),
    Zero(Domain),
    Identity,
    Scale(f64, Box<Op>),
    Sum(Vec<Op>),
    Compose(Box<Op>, Box<Op>),
    Adjoint(Box<Op>),
    Modulus(Box<Op>),
    Axiom(AxiomPower),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Full,
    Trivial,
    /// `{f : φ f ∈ L²}`.
    MaxDom(Scalar),
    /// `D(|C|^power)`.
    Axiom { sym: Arc<AxiomSym>, power: Rational64 },
    /// `{f ∈ D(op) : op f ∈ target}`.
    Preimage { op: Box<Op>, target: Box<Domain> },
    Intersect(Vec<Domain>),
    DirectSum(Vec<Domain>),
    /// Domain of an operator the calculus cannot open up.
    Of(Box<Op>),
}

impl Op {
    pub fn zero_full() -> Op {
        Op::Zero(Domain::Full)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Op::Zero(_))
    }

    pub fn ft() -> Op {
        Op::Transform { inverse: false }
    }

    pub fn ift() -> Op {
        Op::Transform { inverse: true }
    }

    pub fn compose(a: Op, b: Op) -> Op {
        Op::Compose(Box::new(a), Box::new(b))
    }

    pub fn fourier(a: Op) -> Op {
        Op::Fourier(Box::new(a))
    }

    pub fn scale(c: f64, a: Op) -> Op {
        Op::Scale(c, Box::new(a))
    }

    pub fn adjoint(a: Op) -> Op {
        Op::Adjoint(Box::new(a))
    }

    pub fn modulus(a: Op) -> Op {
        Op::Modulus(Box::new(a))
    }

    pub fn diag(entries: Vec<Op>) -> Op {
        let n = entries.len();
        let mut rows: Vec<Vec<Op>> = (0..n).map(|_| vec![Op::zero_full(); n]).collect();
        for (i, e) in entries.into_iter().enumerate() {
            rows[i][i] = e;
        }
        Op::Block(rows)
    }

    /// True when the block has at most one non-zero entry per row and
    /// column.
    pub fn is_monomial_block(rows: &[Vec<Op>]) -> bool {
        let n = rows.len();
        let rows_ok = rows.iter().all(|r| r.iter().filter(|e| !e.is_zero()).count() <= 1);
        let cols_ok = (0..n).all(|j| rows.iter().filter(|r| !r[j].is_zero()).count() <= 1);
        rows_ok && cols_ok
    }

    /// Does the tree mention an abstract symbol or an unopened node?
    pub fn is_abstract(&self) -> bool {
        match self {
            Op::Axiom(_) | Op::Adjoint(_) | Op::Modulus(_) => true,
            Op::Mult(_) | Op::Transform { .. } | Op::Identity => false,
            Op::Zero(d) => d.is_abstract(),
            Op::Fourier(a) | Op::Scale(_, a) => a.is_abstract(),
            Op::Compose(a, b) => a.is_abstract() || b.is_abstract(),
            Op::Sum(ts) => ts.iter().any(Op::is_abstract),
            Op::Block(rows) => rows.iter().flatten().any(Op::is_abstract),
        }
    }

    pub fn in_shape(&self) -> Option<Shape> {
        match self {
            Op::Mult(_) | Op::Fourier(_) | Op::Transform { .. } | Op::Axiom(_) => Some(Shape::Atom),
            Op::Identity => Some(Shape::Any),
            Op::Zero(d) => Some(d.shape()),
            Op::Scale(_, a) => a.in_shape(),
            Op::Sum(ts) => ts.iter().try_fold(Shape::Any, |acc, t| acc.unify(&t.in_shape()?)),
            Op::Compose(_, b) => b.in_shape(),
            Op::Adjoint(a) => a.out_shape(),
            Op::Modulus(a) => a.in_shape(),
            Op::Block(rows) => {
                let n = rows.first()?.len();
                let mut cols = Vec::with_capacity(n);
                for j in 0..n {
                    let s = rows
                        .iter()
                        .try_fold(Shape::Any, |acc, r| acc.unify(&r.get(j)?.in_shape()?))?;
                    cols.push(s);
                }
                Some(Shape::Sum(cols))
            }
        }
    }

    pub fn out_shape(&self) -> Option<Shape> {
        match self {
            Op::Mult(_) | Op::Fourier(_) | Op::Transform { .. } | Op::Axiom(_) => Some(Shape::Atom),
            Op::Identity => Some(Shape::Any),
            Op::Zero(_) => Some(Shape::Any),
            Op::Scale(_, a) => a.out_shape(),
            Op::Sum(ts) => ts.iter().try_fold(Shape::Any, |acc, t| acc.unify(&t.out_shape()?)),
            Op::Compose(a, _) => a.out_shape(),
            Op::Adjoint(a) => a.in_shape(),
            Op::Modulus(a) => a.in_shape(),
            Op::Block(rows) => {
                let mut out = Vec::with_capacity(rows.len());
                for r in rows {
                    let s = r.iter().try_fold(Shape::Any, |acc, e| acc.unify(&e.out_shape()?))?;
                    out.push(s);
                }
                Some(Shape::Sum(out))
            }
        }
    }
}

/// Component-space bookkeeping: `Atom` is one copy of L²(ℝ).
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Any,
    Atom,
    Sum(Vec<Shape>),
}

impl Shape {
    pub fn unify(&self, other: &Shape) -> Option<Shape> {
        match (self, other) {
            (Shape::Any, s) | (s, Shape::Any) => Some(s.clone()),
            (Shape::Atom, Shape::Atom) => Some(Shape::Atom),
            (Shape::Sum(a), Shape::Sum(b)) if a.len() == b.len() => a
                .iter()
                .zip(b)
                .map(|(x, y)| x.unify(y))
                .collect::<Option<Vec<_>>>()
                .map(Shape::Sum),
            _ => None,
        }
    }

    /// Number of L² leaves, counting `Any` as one.
    pub fn leaves(&self) -> usize {
        match self {
            Shape::Any | Shape::Atom => 1,
            Shape::Sum(v) => v.iter().map(Shape::leaves).sum(),
        }
    }
}

impl Domain {
    pub fn is_abstract(&self) -> bool {
        match self {
            Domain::Full | Domain::Trivial | Domain::MaxDom(_) => false,
            Domain::Axiom { .. } | Domain::Of(_) => true,
            Domain::Preimage { op, target } => op.is_abstract() || target.is_abstract(),
            Domain::Intersect(v) | Domain::DirectSum(v) => v.iter().any(Domain::is_abstract),
        }
    }

    pub fn shape(&self) -> Shape {
        match self {
            Domain::DirectSum(v) => Shape::Sum(v.iter().map(Domain::shape).collect()),
            Domain::Intersect(v) => v
                .iter()
                .try_fold(Shape::Any, |acc, d| acc.unify(&d.shape()))
                .unwrap_or(Shape::Any),
            Domain::MaxDom(_) | Domain::Axiom { .. } => Shape::Atom,
            Domain::Preimage { op, .. } => op.in_shape().unwrap_or(Shape::Any),
            Domain::Of(op) => op.in_shape().unwrap_or(Shape::Any),
            Domain::Full | Domain::Trivial => Shape::Any,
        }
    }
}

fn fmt_power(p: Rational64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if p.is_one() {
        Ok(())
    } else if p.is_integer() && p.is_positive() {
        write!(f, "^{}", p.numer())
    } else if p.is_integer() {
        write!(f, "^({})", p.numer())
    } else {
        write!(f, "^({}/{})", p.numer(), p.denom())
    }
}

impl fmt::Display for AxiomPower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.modulus {
            write!(f, "abs({})", self.sym.name)?;
        } else {
            write!(f, "{}", self.sym.name)?;
        }
        fmt_power(self.power, f)
    }
}

fn fmt_coef(c: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        write!(f, "{}", c as i64)
    } else {
        write!(f, "{c}")
    }
}

impl Op {
    /// Binding strength for parenthesization: sums 1, products 2, atoms 3.
    fn level(&self) -> u8 {
        match self {
            Op::Sum(_) => 1,
            Op::Scale(..) | Op::Compose(..) => 2,
            Op::Zero(_) => 1,
            _ => 3,
        }
    }

    fn fmt_at(&self, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.level() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Mult(s) => write!(f, "mult({s})"),
            Op::Fourier(a) => write!(f, "fourier({a})"),
            Op::Transform { inverse: false } => write!(f, "ft"),
            Op::Transform { inverse: true } => write!(f, "ift"),
            Op::Block(rows) => {
                write!(f, "block[")?;
                for (i, r) in rows.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "[")?;
                    for (j, e) in r.iter().enumerate() {
                        if j > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{e}")?;
                    }
                    write!(f, "]")?;
                }
                write!(f, "]")
            }
            Op::Zero(Domain::Full) => write!(f, "0"),
            Op::Zero(d) => write!(f, "zero on {d}"),
            Op::Identity => write!(f, "id"),
            Op::Scale(c, a) => {
                if *c == -1.0 {
                    write!(f, "-")?;
                } else {
                    fmt_coef(*c, f)?;
                    write!(f, "*")?;
                }
                a.fmt_at(3, f)
            }
            Op::Sum(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    match (i, t) {
                        (0, t) => t.fmt_at(2, f)?,
                        (_, Op::Scale(c, a)) if *c < 0.0 => {
                            write!(f, " - ")?;
                            if *c != -1.0 {
                                fmt_coef(-c, f)?;
                                write!(f, "*")?;
                                a.fmt_at(3, f)?;
                            } else {
                                a.fmt_at(2, f)?;
                            }
                        }
                        (_, t) => {
                            write!(f, " + ")?;
                            t.fmt_at(2, f)?;
                        }
                    }
                }
                Ok(())
            }
            Op::Compose(a, b) => {
                a.fmt_at(3, f)?;
                write!(f, "*")?;
                b.fmt_at(2, f)
            }
            Op::Adjoint(a) => write!(f, "adj({a})"),
            Op::Modulus(a) => write!(f, "abs({a})"),
            Op::Axiom(p) => write!(f, "{p}"),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, name: &str, v: &[Domain]| {
            write!(f, "{name}(")?;
            for (i, d) in v.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{d}")?;
            }
            write!(f, ")")
        };
        match self {
            Domain::Full => write!(f, "full"),
            Domain::Trivial => write!(f, "trivial"),
            Domain::MaxDom(s) => write!(f, "maxdom({s})"),
            Domain::Axiom { sym, power } => {
                write!(f, "dom({}", sym.name)?;
                fmt_power(*power, f)?;
                write!(f, ")")
            }
            Domain::Preimage { op, target } => write!(f, "pre({op}, {target})"),
            Domain::Intersect(v) => list(f, "meet", v),
            Domain::DirectSum(v) => list(f, "dsum", v),
            Domain::Of(op) => write!(f, "dom({op})"),
        }
    }
}

impl Domain {
    pub fn axiom(sym: Arc<AxiomSym>, power: Rational64) -> Domain {
        if power.is_zero() {
            Domain::Full
        } else {
            Domain::Axiom { sym, power }
        }
    }
}
