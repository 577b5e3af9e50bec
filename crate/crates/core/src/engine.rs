//! Rewriting engine: block algebra, adjoints, moduli, commutators and the
//! domain calculus.
//!
//! Every builder here assumes its operands are already normalized and
//! returns a normalized result. [`Engine::normalize`] lifts an arbitrary
//! tree into normal form bottom-up. Declared facts about abstract symbols
//! live on the engine; each use is written to a [`Trail`] so verdicts can
//! cite it.

use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::op::{is_even_integer, AxiomPower, AxiomSym, Domain, Op, Shape};
use crate::scalar::{Dominance, Growth, Scalar, ScalarError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AlgebraError {
    #[error("shape mismatch between `{left}` and `{right}`")]
    ShapeMismatch { left: String, right: String },
    #[error("domains `{left}` and `{right}` live in different spaces")]
    AmbientMismatch { left: String, right: String },
    #[error("`{0}` is not densely defined")]
    NotDenselyDefined(String),
    #[error("{what} is not supported for `{op}`")]
    Unsupported { op: String, what: &'static str },
    #[error("no modulus rule applies to `{0}`")]
    IrreducibleModulus(String),
    #[error("power {power} of `{op}` is not defined")]
    InvalidPower { op: String, power: Rational64 },
    #[error("malformed block: {0}")]
    MalformedBlock(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

pub type Result<T> = std::result::Result<T, AlgebraError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FactKind {
    /// `D(XY) = {0}`.
    TrivialComposition,
    /// Any subspace of `D(X)` meets any subspace of `D(Y)` only in `{0}`.
    TrivialIntersection,
}

impl FactKind {
    pub fn keyword(self) -> &'static str {
        match self {
            FactKind::TrivialComposition => "trivial_composition",
            FactKind::TrivialIntersection => "trivial_intersection",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fact {
    pub label: String,
    pub kind: FactKind,
    pub left: Op,
    pub right: Op,
    left_dom: Domain,
    right_dom: Domain,
}

impl Fact {
    pub fn statement(&self) -> String {
        format!("{}({}, {})", self.kind.keyword(), self.left, self.right)
    }
}

/// One use of a declared fact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomUse {
    pub label: String,
    pub statement: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trail {
    pub uses: Vec<AxiomUse>,
}

impl Trail {
    pub fn new() -> Self {
        Trail::default()
    }

    fn record(&mut self, fact: &Fact) {
        let u = AxiomUse {
            label: fact.label.clone(),
            statement: fact.statement(),
        };
        if !self.uses.contains(&u) {
            self.uses.push(u);
        }
    }

    pub fn merge(&mut self, other: &Trail) {
        for u in &other.uses {
            if !self.uses.contains(u) {
                self.uses.push(u.clone());
            }
        }
    }

    pub fn cites(&self, label: &str) -> bool {
        self.uses.iter().any(|u| u.label == label)
    }
}

/// Three-valued answer used by the domain predicates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tri {
    Yes,
    No,
    Unknown,
}

/// A symbol and `(coefficient, power)` terms in it.
pub type PowerSeries = (Arc<AxiomSym>, Vec<(f64, Rational64)>);

#[derive(Clone, Debug, Default)]
pub struct Engine {
    facts: Vec<Fact>,
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.label, self.statement())
    }
}

fn mismatch(a: &impl fmt::Display, b: &impl fmt::Display) -> AlgebraError {
    AlgebraError::ShapeMismatch {
        left: a.to_string(),
        right: b.to_string(),
    }
}

fn unsupported(op: &Op, what: &'static str) -> AlgebraError {
    AlgebraError::Unsupported {
        op: op.to_string(),
        what,
    }
}

/// Positive terms first, restrictions last, then by atom text.
fn sort_terms(v: &mut [Op]) {
    v.sort_by_cached_key(|o| {
        let (c, a) = split_scale(o);
        (a.is_zero(), c < 0.0, a.to_string(), c.to_bits())
    });
}

fn mk_sum(mut terms: Vec<Op>) -> Op {
    if terms.len() == 1 {
        return terms.pop().expect("one term");
    }
    sort_terms(&mut terms);
    Op::Sum(terms)
}

/// `(coefficient, atom)` view of a normalized term.
fn split_scale(op: &Op) -> (f64, &Op) {
    match op {
        Op::Scale(c, a) => (*c, a),
        other => (1.0, other),
    }
}

impl Engine {
    pub fn new() -> Self {
        Engine::default()
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    /// Declare a fact. Operands are normalized first.
    pub fn add_fact(&mut self, label: &str, kind: FactKind, left: &Op, right: &Op) -> Result<()> {
        let mut scratch = Trail::new();
        let left = self.normalize(left, &mut scratch)?;
        let right = self.normalize(right, &mut scratch)?;
        let left_dom = self.domain(&left, &mut scratch)?;
        let right_dom = self.domain(&right, &mut scratch)?;
        self.facts.push(Fact {
            label: label.to_string(),
            kind,
            left,
            right,
            left_dom,
            right_dom,
        });
        Ok(())
    }

    pub fn remove_fact(&mut self, label: &str) -> bool {
        let before = self.facts.len();
        self.facts.retain(|f| f.label != label);
        self.facts.len() != before
    }

    // ---------------------------------------------------------------
    // normalization

    pub fn normalize(&self, op: &Op, t: &mut Trail) -> Result<Op> {
        match op {
            Op::Mult(s) => Ok(self.mult(s)),
            Op::Fourier(a) => {
                let a = self.normalize(a, t)?;
                self.fourier(a, t)
            }
            Op::Transform { .. } | Op::Identity => Ok(op.clone()),
            Op::Axiom(p) => Ok(self.axiom(p.clone())),
            Op::Zero(d) => Ok(Op::Zero(self.simplify_domain(d, t)?)),
            Op::Block(rows) => {
                let rows = rows
                    .iter()
                    .map(|r| r.iter().map(|e| self.normalize(e, t)).collect())
                    .collect::<Result<Vec<Vec<Op>>>>()?;
                self.block(rows, t)
            }
            Op::Scale(c, a) => {
                let a = self.normalize(a, t)?;
                self.scale(*c, a, t)
            }
            Op::Sum(ts) => {
                let ts = ts.iter().map(|x| self.normalize(x, t)).collect::<Result<Vec<_>>>()?;
                self.sum(ts, t)
            }
            Op::Compose(a, b) => {
                let a = self.normalize(a, t)?;
                let b = self.normalize(b, t)?;
                self.compose(a, b, t)
            }
            Op::Adjoint(a) => {
                let a = self.normalize(a, t)?;
                match self.adjoint(&a, t) {
                    Ok(r) => Ok(r),
                    Err(AlgebraError::Unsupported { .. }) => Ok(Op::adjoint(a)),
                    Err(e) => Err(e),
                }
            }
            Op::Modulus(a) => {
                let a = self.normalize(a, t)?;
                match self.modulus(&a, t) {
                    Ok(r) => Ok(r),
                    Err(AlgebraError::Unsupported { .. } | AlgebraError::IrreducibleModulus(_)) => {
                        Ok(Op::modulus(a))
                    }
                    Err(e) => Err(e),
                }
            }
        }
    }

    pub fn mult(&self, phi: &Scalar) -> Op {
        let s = phi.simplify();
        if s.is_zero() {
            return Op::zero_full();
        }
        if s.is_constant() {
            if let Ok(c) = s.eval(0.0) {
                return if c == 1.0 {
                    Op::Identity
                } else {
                    Op::scale(c, Op::Identity)
                };
            }
        }
        Op::Mult(s)
    }

    pub fn axiom(&self, p: AxiomPower) -> Op {
        if p.power.is_zero() {
            Op::Identity
        } else {
            Op::Axiom(p.canonical())
        }
    }

    pub fn fourier(&self, inner: Op, t: &mut Trail) -> Result<Op> {
        if inner.in_shape().and_then(|s| s.unify(&Shape::Atom)).is_none() {
            return Err(mismatch(&"fourier", &inner));
        }
        Ok(match inner {
            Op::Identity => Op::Identity,
            Op::Scale(c, ref a) if **a == Op::Identity => Op::scale(c, Op::Identity),
            Op::Zero(d) => Op::Zero(self.preimage(&Op::ft(), &d, t)?),
            other => Op::fourier(other),
        })
    }

    pub fn scale(&self, c: f64, op: Op, t: &mut Trail) -> Result<Op> {
        if c == 1.0 {
            return Ok(op);
        }
        if c == 0.0 {
            return Ok(Op::Zero(self.domain(&op, t)?));
        }
        Ok(match op {
            Op::Zero(_) => op,
            Op::Mult(s) => self.mult(&(Scalar::Const(c) * s)),
            Op::Scale(d, a) => return self.scale(c * d, *a, t),
            Op::Fourier(a) => {
                let a = self.scale(c, *a, t)?;
                self.fourier(a, t)?
            }
            Op::Sum(ts) => {
                let ts = ts.into_iter().map(|x| self.scale(c, x, t)).collect::<Result<Vec<_>>>()?;
                self.sum(ts, t)?
            }
            Op::Block(rows) => {
                let rows = rows
                    .into_iter()
                    .map(|r| r.into_iter().map(|e| self.scale(c, e, t)).collect())
                    .collect::<Result<Vec<Vec<Op>>>>()?;
                self.block(rows, t)?
            }
            other => Op::scale(c, other),
        })
    }

    /// Block with entry normalization of zeros and collapse of all-zero
    /// grids.
    pub fn block(&self, mut rows: Vec<Vec<Op>>, t: &mut Trail) -> Result<Op> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(AlgebraError::MalformedBlock(format!(
                "expected a square grid, got {} rows",
                n
            )));
        }
        let probe = Op::Block(rows.clone());
        if probe.in_shape().is_none() || probe.out_shape().is_none() {
            return Err(AlgebraError::MalformedBlock(format!(
                "entries of `{probe}` act between inconsistent component spaces"
            )));
        }
        let mut col_domains = Vec::with_capacity(n);
        for j in 0..n {
            let nz: Vec<usize> = (0..n).filter(|&i| !rows[i][j].is_zero()).collect();
            let zero_doms: Vec<Domain> = (0..n)
                .filter_map(|i| match &rows[i][j] {
                    Op::Zero(d) => Some(d.clone()),
                    _ => None,
                })
                .collect();
            if zero_doms.is_empty() {
                continue;
            }
            let zdom = self.intersect(&zero_doms, t)?;
            let fill = if nz.is_empty() {
                col_domains.push(zdom.clone());
                zdom
            } else {
                let doms = nz
                    .iter()
                    .map(|&i| self.domain(&rows[i][j], t))
                    .collect::<Result<Vec<_>>>()?;
                let dom = self.intersect(&doms, t)?;
                if self.subset(&dom, &zdom, t)? {
                    Domain::Full
                } else {
                    zdom
                }
            };
            for row in rows.iter_mut() {
                if row[j].is_zero() {
                    row[j] = Op::Zero(fill.clone());
                }
            }
        }
        if rows.iter().flatten().all(Op::is_zero) {
            return Ok(Op::Zero(self.direct_sum(col_domains)));
        }
        Ok(Op::Block(rows))
    }

    /// View `op` as an `n × n` block, if it has that shape.
    fn as_block(&self, op: &Op, n: usize) -> Option<Vec<Vec<Op>>> {
        match op {
            Op::Block(rows) if rows.len() == n => Some(rows.clone()),
            Op::Identity => match Op::diag(vec![Op::Identity; n]) {
                Op::Block(r) => Some(r),
                _ => None,
            },
            Op::Scale(c, a) if **a == Op::Identity => {
                match Op::diag(vec![Op::scale(*c, Op::Identity); n]) {
                    Op::Block(r) => Some(r),
                    _ => None,
                }
            }
            Op::Zero(d) => {
                let cols: Vec<Domain> = match d {
                    Domain::DirectSum(v) if v.len() == n => v.clone(),
                    Domain::Full | Domain::Trivial => vec![d.clone(); n],
                    _ => return None,
                };
                Some((0..n).map(|_| cols.iter().cloned().map(Op::Zero).collect()).collect())
            }
            _ => None,
        }
    }

    pub fn sum(&self, terms: Vec<Op>, t: &mut Trail) -> Result<Op> {
        let mut flat = Vec::with_capacity(terms.len());
        for term in terms {
            match term {
                Op::Sum(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.is_empty() {
            return Ok(Op::zero_full());
        }
        let ins = flat.iter().try_fold(Shape::Any, |acc, x| acc.unify(&x.in_shape()?));
        let outs = flat.iter().try_fold(Shape::Any, |acc, x| acc.unify(&x.out_shape()?));
        if ins.is_none() || outs.is_none() {
            return Err(mismatch(&flat[0], &flat[flat.len() - 1]));
        }
        let block_n = flat.iter().find_map(|x| match x {
            Op::Block(rows) => Some(rows.len()),
            Op::Zero(Domain::DirectSum(v)) => Some(v.len()),
            _ => None,
        });
        if let Some(n) = block_n {
            if !flat.iter().all(Op::is_zero) {
                return self.block_sum(&flat, n, t);
            }
        }

        let mut domains = Vec::with_capacity(flat.len());
        let mut mult: Option<Scalar> = None;
        let mut ident = 0.0;
        let mut fourier: Vec<Op> = Vec::new();
        let mut atoms: Vec<(Op, f64)> = Vec::new();
        for term in &flat {
            domains.push(self.domain(term, t)?);
            match term {
                Op::Zero(_) => {}
                Op::Mult(s) => {
                    mult = Some(match mult.take() {
                        None => s.clone(),
                        Some(m) => m + s.clone(),
                    })
                }
                Op::Identity => ident += 1.0,
                Op::Scale(c, a) if **a == Op::Identity => ident += c,
                Op::Fourier(a) => fourier.push((**a).clone()),
                other => {
                    let (c, atom) = split_scale(other);
                    match atoms.iter_mut().find(|(a, _)| a == atom) {
                        Some((_, k)) => *k += c,
                        None => atoms.push((atom.clone(), c)),
                    }
                }
            }
        }
        let required = self.intersect(&domains, t)?;

        let mut out: Vec<Op> = Vec::new();
        match mult {
            Some(m) => out.push(self.mult(&(m + Scalar::Const(ident)))),
            None if ident != 0.0 => out.push(self.scale(ident, Op::Identity, t)?),
            None => {}
        }
        match fourier.len() {
            0 => {}
            1 => out.push(Op::fourier(fourier.pop().expect("one"))),
            _ => {
                let inner = self.sum(fourier, t)?;
                out.push(self.fourier(inner, t)?);
            }
        }
        for (atom, c) in atoms {
            if c != 0.0 {
                out.push(self.scale(c, atom, t)?);
            }
        }
        out.retain(|o| !o.is_zero());
        if out.is_empty() {
            return Ok(Op::Zero(required));
        }
        let doms = out.iter().map(|o| self.domain(o, t)).collect::<Result<Vec<_>>>()?;
        let natural = self.intersect(&doms, t)?;
        if !self.subset(&natural, &required, t)? {
            out.push(Op::Zero(required));
        }
        Ok(mk_sum(out))
    }

    fn block_sum(&self, terms: &[Op], n: usize, t: &mut Trail) -> Result<Op> {
        let grids = terms
            .iter()
            .map(|x| self.as_block(x, n).ok_or_else(|| mismatch(&terms[0], x)))
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                let entries = grids.iter().map(|g| g[i][j].clone()).collect();
                row.push(self.sum(entries, t)?);
            }
            rows.push(row);
        }
        self.block(rows, t)
    }

    /// `E` restricted to `R`, where `R ⊆ D(E)`.
    fn restrict(&self, e: Op, r: Domain, t: &mut Trail) -> Result<Op> {
        let d = self.domain(&e, t)?;
        if self.subset(&d, &r, t)? {
            return Ok(e);
        }
        self.sum(vec![e, Op::Zero(r)], t)
    }

    pub fn compose(&self, s: Op, x: Op, t: &mut Trail) -> Result<Op> {
        match (s.in_shape(), x.out_shape()) {
            (Some(a), Some(b)) if a.unify(&b).is_some() => {}
            _ => return Err(mismatch(&s, &x)),
        }
        match (s, x) {
            (Op::Identity, x) => Ok(x),
            (s, Op::Identity) => Ok(s),
            (_, Op::Zero(d)) => Ok(Op::Zero(d)),
            (Op::Zero(d), x) => Ok(Op::Zero(self.preimage(&x, &d, t)?)),
            (Op::Scale(c, a), x) => {
                let inner = self.compose(*a, x, t)?;
                self.scale(c, inner, t)
            }
            (s, Op::Scale(c, b)) => {
                let inner = self.compose(s, *b, t)?;
                self.scale(c, inner, t)
            }
            (Op::Sum(ts), x) => {
                let parts = ts
                    .into_iter()
                    .map(|a| self.compose(a, x.clone(), t))
                    .collect::<Result<Vec<_>>>()?;
                self.sum(parts, t)
            }
            (s, Op::Sum(ts)) if self.domain(&s, t)? == Domain::Full => {
                let parts = ts
                    .into_iter()
                    .map(|b| self.compose(s.clone(), b, t))
                    .collect::<Result<Vec<_>>>()?;
                self.sum(parts, t)
            }
            (Op::Block(a), Op::Block(b)) => {
                if a.len() != b.len() {
                    return Err(mismatch(&Op::Block(a), &Op::Block(b)));
                }
                let n = a.len();
                let mut rows = Vec::with_capacity(n);
                for i in 0..n {
                    let mut row = Vec::with_capacity(n);
                    for j in 0..n {
                        let parts = (0..n)
                            .map(|k| self.compose(a[i][k].clone(), b[k][j].clone(), t))
                            .collect::<Result<Vec<_>>>()?;
                        row.push(self.sum(parts, t)?);
                    }
                    rows.push(row);
                }
                self.block(rows, t)
            }
            (Op::Mult(phi), Op::Mult(psi)) => {
                let e = self.mult(&(phi.clone() * psi.clone()));
                let r = self.preimage(&Op::Mult(psi), &Domain::MaxDom(phi), t)?;
                self.restrict(e, r, t)
            }
            (Op::Fourier(a), Op::Fourier(b)) => {
                let inner = self.compose(*a, *b, t)?;
                self.fourier(inner, t)
            }
            (Op::Transform { inverse: a }, Op::Transform { inverse: b }) if a != b => Ok(Op::Identity),
            (Op::Axiom(p), Op::Axiom(q)) if p.sym == q.sym && combinable(&p, &q).is_some() => {
                let modulus = combinable(&p, &q).expect("checked");
                let e = self.axiom(AxiomPower::new(p.sym.clone(), p.power + q.power, modulus));
                let r = self.preimage(&Op::Axiom(q), &self.axiom_domain(&p.sym, p.power), t)?;
                self.restrict(e, r, t)
            }
            (Op::Compose(a, b), x) => {
                let inner = self.compose(*b, x, t)?;
                self.compose(*a, inner, t)
            }
            (s, Op::Compose(b, c)) => {
                let sb = self.compose(s.clone(), (*b).clone(), t)?;
                if sb == Op::compose(s.clone(), (*b).clone()) {
                    Ok(Op::compose(s, Op::Compose(b, c)))
                } else {
                    self.compose(sb, *c, t)
                }
            }
            (s, x) => Ok(Op::compose(s, x)),
        }
    }

    /// Entrywise block simplification; an alias of [`Engine::normalize`].
    pub fn block_simplify(&self, op: &Op, t: &mut Trail) -> Result<Op> {
        self.normalize(op, t)
    }

    pub fn power(&self, op: &Op, r: Rational64, t: &mut Trail) -> Result<Op> {
        let invalid = || AlgebraError::InvalidPower {
            op: op.to_string(),
            power: r,
        };
        if r.is_one() {
            return Ok(op.clone());
        }
        if r.is_zero() {
            return Ok(Op::Identity);
        }
        let positive_integer = r.is_integer() && r.is_positive();
        let repeated = |t: &mut Trail| -> Result<Op> {
            let n = r.to_integer();
            let mut acc = op.clone();
            for _ in 1..n {
                acc = self.compose(op.clone(), acc, t)?;
            }
            Ok(acc)
        };
        match op {
            Op::Identity => Ok(Op::Identity),
            Op::Mult(_) if positive_integer => repeated(t),
            Op::Mult(phi) => {
                let p = phi.clone().pow(r)?;
                Ok(self.mult(&p))
            }
            Op::Fourier(a) => {
                let inner = self.power(a, r, t)?;
                self.fourier(inner, t)
            }
            Op::Scale(c, a) => {
                if !r.is_integer() && *c < 0.0 {
                    return Err(invalid());
                }
                let k = c.powf(r.to_f64().ok_or_else(invalid)?);
                let inner = self.power(a, r, t)?;
                self.scale(k, inner, t)
            }
            Op::Axiom(p) => {
                let np = p.power * r;
                let props = p.sym.props;
                if np.is_negative() && !props.invertible {
                    return Err(invalid());
                }
                let modulus = if props.positive {
                    false
                } else if r.is_integer() {
                    p.modulus
                } else if p.modulus && props.selfadjoint {
                    true
                } else {
                    return Err(invalid());
                };
                Ok(self.axiom(AxiomPower::new(p.sym.clone(), np, modulus)))
            }
            Op::Block(rows) if !positive_integer => {
                let n = rows.len();
                let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || rows[i][j].is_zero()));
                if !diagonal {
                    return Err(invalid());
                }
                let mut out = rows.clone();
                for (i, row) in out.iter_mut().enumerate() {
                    row[i] = self.power(&rows[i][i], r, t)?;
                }
                self.block(out, t)
            }
            _ if positive_integer => repeated(t),
            _ => Err(invalid()),
        }
    }

    // ---------------------------------------------------------------
    // adjoint, modulus, commutators

    pub fn adjoint(&self, op: &Op, t: &mut Trail) -> Result<Op> {
        match op {
            Op::Mult(_) | Op::Identity | Op::Modulus(_) => Ok(op.clone()),
            Op::Transform { inverse } => Ok(Op::Transform { inverse: !inverse }),
            Op::Fourier(a) => {
                let inner = self.adjoint(a, t)?;
                self.fourier(inner, t)
            }
            Op::Scale(c, a) => {
                let inner = self.adjoint(a, t)?;
                self.scale(*c, inner, t)
            }
            Op::Zero(d) => match self.density(d, t)? {
                Tri::Yes => Ok(Op::zero_full()),
                Tri::No => Err(AlgebraError::NotDenselyDefined(op.to_string())),
                Tri::Unknown => Err(unsupported(op, "adjoint of a zero on an undecided domain")),
            },
            Op::Axiom(p) if p.sym.props.selfadjoint => Ok(op.clone()),
            Op::Sum(ts) if self.functional_calculus(ts).is_some() => Ok(op.clone()),
            Op::Block(rows) => self.block_adjoint(op, rows, t),
            _ => Err(unsupported(op, "adjoint")),
        }
    }

    fn block_adjoint(&self, op: &Op, rows: &[Vec<Op>], t: &mut Trail) -> Result<Op> {
        if !Op::is_monomial_block(rows) {
            return Err(unsupported(op, "adjoint of a non-monomial block"));
        }
        let n = rows.len();
        let mut out: Vec<Vec<Op>> = (0..n).map(|_| vec![Op::zero_full(); n]).collect();
        for j in 0..n {
            let nz = (0..n).find(|&i| !rows[i][j].is_zero());
            for (i, row) in rows.iter().enumerate() {
                let Op::Zero(d) = &row[j] else { continue };
                match (nz, self.density(d, t)?) {
                    (Some(_), _) if *d == Domain::Full => {}
                    (Some(_), _) => {
                        return Err(unsupported(op, "adjoint of a block with restricted zeros"))
                    }
                    (None, Tri::Yes) => {}
                    (None, Tri::No) => {
                        return Err(AlgebraError::NotDenselyDefined(op.to_string()));
                    }
                    (None, Tri::Unknown) => {
                        return Err(unsupported(op, "adjoint of a zero on an undecided domain"))
                    }
                }
                let _ = i;
            }
            if let Some(i) = nz {
                out[j][i] = self.adjoint(&rows[i][j], t)?;
            }
        }
        self.block(out, t)
    }

    /// `|T| = √(T*T)` when `T*T` is block-diagonal with rootable entries.
    pub fn modulus(&self, op: &Op, t: &mut Trail) -> Result<Op> {
        let adj = self.adjoint(op, t)?;
        let gram = self.compose(adj, op.clone(), t)?;
        self.psd_sqrt(&gram, t)
    }

    fn psd_sqrt(&self, op: &Op, t: &mut Trail) -> Result<Op> {
        let irreducible = || AlgebraError::IrreducibleModulus(op.to_string());
        match op {
            Op::Zero(_) | Op::Identity => Ok(op.clone()),
            Op::Mult(phi) => {
                if !phi.sign().is_nonnegative() {
                    return Err(irreducible());
                }
                Ok(self.mult(&phi.clone().sqrt()?))
            }
            Op::Scale(c, a) if *c > 0.0 => {
                let inner = self.psd_sqrt(a, t)?;
                self.scale(c.sqrt(), inner, t)
            }
            Op::Fourier(a) => {
                let inner = self.psd_sqrt(a, t)?;
                self.fourier(inner, t)
            }
            Op::Axiom(p) => {
                let props = p.sym.props;
                let half = p.power / Rational64::from_integer(2);
                if props.positive {
                    Ok(self.axiom(AxiomPower::new(p.sym.clone(), half, false)))
                } else if props.selfadjoint && (p.modulus || is_even_integer(p.power)) {
                    Ok(self.axiom(AxiomPower::new(p.sym.clone(), half, true)))
                } else {
                    Err(irreducible())
                }
            }
            Op::Block(rows) => {
                let n = rows.len();
                let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || rows[i][j].is_zero()));
                if !diagonal {
                    return Err(irreducible());
                }
                let mut out = rows.clone();
                for (i, row) in out.iter_mut().enumerate() {
                    row[i] = self.psd_sqrt(&rows[i][i], t)?;
                }
                self.block(out, t)
            }
            _ => Err(irreducible()),
        }
    }

    pub fn commutator(&self, a: &Op, b: &Op, t: &mut Trail) -> Result<Op> {
        let ab = self.compose(a.clone(), b.clone(), t)?;
        let ba = self.compose(b.clone(), a.clone(), t)?;
        let neg = self.scale(-1.0, ba, t)?;
        self.sum(vec![ab, neg], t)
    }

    pub fn self_commutator(&self, op: &Op, t: &mut Trail) -> Result<Op> {
        let adj = self.adjoint(op, t)?;
        let tt = self.compose(op.clone(), adj.clone(), t)?;
        let tt2 = self.compose(adj, op.clone(), t)?;
        let neg = self.scale(-1.0, tt2, t)?;
        self.sum(vec![tt, neg], t)
    }

    /// Terms of a restriction-free linear combination of powers of one
    /// self-adjoint symbol, as `(coefficient, power)`.
    pub fn functional_calculus(&self, terms: &[Op]) -> Option<PowerSeries> {
        let mut sym: Option<Arc<AxiomSym>> = None;
        let mut out = Vec::new();
        for term in terms {
            let (c, atom) = split_scale(term);
            let (p, coef) = match atom {
                Op::Axiom(p) => (p, c),
                Op::Identity => {
                    out.push((c, Rational64::zero()));
                    continue;
                }
                _ => return None,
            };
            if !p.sym.props.selfadjoint || (p.modulus && !p.sym.props.positive) {
                return None;
            }
            match &sym {
                None => sym = Some(p.sym.clone()),
                Some(s) if *s == p.sym => {}
                Some(_) => return None,
            }
            out.push((coef, p.power));
        }
        sym.map(|s| (s, out))
    }

    // ---------------------------------------------------------------
    // domains

    /// `D(C^p)` with the boundedness shortcuts applied.
    pub fn axiom_domain(&self, sym: &Arc<AxiomSym>, power: Rational64) -> Domain {
        let props = sym.props;
        if power.is_zero()
            || (power.is_positive() && props.bounded)
            || (power.is_negative() && props.boundedly_invertible)
        {
            Domain::Full
        } else {
            Domain::axiom(sym.clone(), power)
        }
    }

    pub fn domain(&self, op: &Op, t: &mut Trail) -> Result<Domain> {
        match op {
            Op::Mult(s) => self.simplify_domain(&Domain::MaxDom(s.clone()), t),
            Op::Fourier(a) => {
                let inner = self.domain(a, t)?;
                self.preimage(&Op::ft(), &inner, t)
            }
            Op::Transform { .. } | Op::Identity => Ok(Domain::Full),
            Op::Zero(d) => self.simplify_domain(d, t),
            Op::Scale(_, a) => self.domain(a, t),
            Op::Sum(ts) => {
                let ds = ts.iter().map(|x| self.domain(x, t)).collect::<Result<Vec<_>>>()?;
                self.intersect(&ds, t)
            }
            Op::Compose(a, b) => {
                for f in &self.facts {
                    if f.kind == FactKind::TrivialComposition && f.left == **a && f.right == **b {
                        t.record(f);
                        return Ok(Domain::Trivial);
                    }
                }
                let da = self.domain(a, t)?;
                self.preimage(b, &da, t)
            }
            Op::Block(rows) => {
                let n = rows.first().map_or(0, Vec::len);
                let mut cols = Vec::with_capacity(n);
                for j in 0..n {
                    let ds = rows
                        .iter()
                        .map(|r| self.domain(&r[j], t))
                        .collect::<Result<Vec<_>>>()?;
                    cols.push(self.intersect(&ds, t)?);
                }
                Ok(self.direct_sum(cols))
            }
            Op::Axiom(p) => Ok(self.axiom_domain(&p.sym, p.power)),
            Op::Adjoint(_) | Op::Modulus(_) => Ok(Domain::Of(Box::new(op.clone()))),
        }
    }

    fn direct_sum(&self, v: Vec<Domain>) -> Domain {
        if v.iter().all(|d| *d == Domain::Full) {
            Domain::Full
        } else if v.iter().all(|d| *d == Domain::Trivial) {
            Domain::Trivial
        } else {
            Domain::DirectSum(v)
        }
    }

    pub fn simplify_domain(&self, d: &Domain, t: &mut Trail) -> Result<Domain> {
        Ok(match d {
            Domain::Full | Domain::Trivial => d.clone(),
            Domain::Of(op) => {
                let op = self.normalize(op, t)?;
                self.domain(&op, t)?
            }
            Domain::MaxDom(phi) => canonical_maxdom(phi),
            Domain::Axiom { sym, power } => self.axiom_domain(sym, *power),
            Domain::Preimage { op, target } => {
                let target = self.simplify_domain(target, t)?;
                self.preimage(op, &target, t)?
            }
            Domain::Intersect(v) => self.intersect(v, t)?,
            Domain::DirectSum(v) => {
                let v = v.iter().map(|x| self.simplify_domain(x, t)).collect::<Result<Vec<_>>>()?;
                self.direct_sum(v)
            }
        })
    }

    fn injective(&self, op: &Op) -> bool {
        match op {
            Op::Mult(s) => s.to_poly().is_some_and(|p| !p.terms.is_empty()),
            Op::Transform { .. } | Op::Identity => true,
            Op::Fourier(a) | Op::Scale(_, a) => self.injective(a),
            Op::Axiom(p) => p.sym.props.invertible,
            _ => false,
        }
    }

    /// `{f ∈ D(op) : op f ∈ target}`, simplified.
    pub fn preimage(&self, op: &Op, target: &Domain, t: &mut Trail) -> Result<Domain> {
        if *target == Domain::Full {
            return self.domain(op, t);
        }
        let dom = self.domain(op, t)?;
        if dom == Domain::Trivial {
            return Ok(Domain::Trivial);
        }
        let keep = || Domain::Preimage {
            op: Box::new(op.clone()),
            target: Box::new(target.clone()),
        };
        Ok(match (op, target) {
            (Op::Identity, _) => target.clone(),
            (Op::Scale(_, a), _) => self.preimage(a, target, t)?,
            (Op::Zero(d), _) => d.clone(),
            (_, Domain::Trivial) if self.injective(op) => Domain::Trivial,
            (_, Domain::Intersect(v)) => {
                let parts = v.iter().map(|d| self.preimage(op, d, t)).collect::<Result<Vec<_>>>()?;
                self.intersect(&parts, t)?
            }
            (Op::Mult(phi), Domain::MaxDom(psi)) => {
                let prod = Domain::MaxDom(phi.clone() * psi.clone());
                self.intersect(&[Domain::MaxDom(phi.clone()), prod], t)?
            }
            (Op::Axiom(p), Domain::Axiom { sym, power }) if p.sym == *sym => {
                let outer = self.axiom_domain(sym, p.power + *power);
                self.intersect(&[dom, outer], t)?
            }
            (
                Op::Transform { inverse },
                Domain::Preimage {
                    op: inner,
                    target: y,
                },
            ) if **inner == (Op::Transform { inverse: !inverse }) => (**y).clone(),
            (
                Op::Fourier(y),
                Domain::Preimage {
                    op: inner,
                    target: z,
                },
            ) if **inner == Op::ft() => {
                let mid = self.preimage(y, z, t)?;
                self.preimage(&Op::ft(), &mid, t)?
            }
            (Op::Compose(a, b), _) => {
                let mid = self.preimage(a, target, t)?;
                self.preimage(b, &mid, t)?
            }
            (Op::Block(rows), Domain::DirectSum(v))
                if v.len() == rows.len() && Op::is_monomial_block(rows) =>
            {
                let Domain::DirectSum(cols) = (match &dom {
                    Domain::DirectSum(_) => dom.clone(),
                    other => Domain::DirectSum(vec![other.clone(); rows.len()]),
                }) else {
                    unreachable!()
                };
                let mut out = Vec::with_capacity(rows.len());
                for (j, col) in cols.into_iter().enumerate() {
                    match (0..rows.len()).find(|&i| !rows[i][j].is_zero()) {
                        Some(i) => {
                            let pre = self.preimage(&rows[i][j], &v[i], t)?;
                            out.push(self.intersect(&[col, pre], t)?);
                        }
                        None => out.push(col),
                    }
                }
                self.direct_sum(out)
            }
            _ => keep(),
        })
    }

    pub fn intersect(&self, list: &[Domain], t: &mut Trail) -> Result<Domain> {
        let mut items: Vec<Domain> = Vec::new();
        for d in list {
            match self.simplify_domain(d, t)? {
                Domain::Full => {}
                Domain::Trivial => return Ok(Domain::Trivial),
                Domain::Intersect(v) => items.extend(v),
                other => items.push(other),
            }
        }
        if items.is_empty() {
            return Ok(Domain::Full);
        }
        let sums: Vec<usize> = items
            .iter()
            .enumerate()
            .filter_map(|(i, d)| matches!(d, Domain::DirectSum(_)).then_some(i))
            .collect();
        if !sums.is_empty() {
            let Domain::DirectSum(first) = &items[sums[0]] else { unreachable!() };
            let n = first.len();
            for d in &items {
                match d {
                    Domain::DirectSum(v) if v.len() == n => {}
                    Domain::DirectSum(_) | Domain::MaxDom(_) | Domain::Axiom { .. } => {
                        return Err(AlgebraError::AmbientMismatch {
                            left: items[sums[0]].to_string(),
                            right: d.to_string(),
                        })
                    }
                    _ => {}
                }
            }
            if sums.len() == items.len() {
                let mut comps = Vec::with_capacity(n);
                for k in 0..n {
                    let col: Vec<Domain> = items
                        .iter()
                        .map(|d| match d {
                            Domain::DirectSum(v) => v[k].clone(),
                            _ => unreachable!(),
                        })
                        .collect();
                    comps.push(self.intersect(&col, t)?);
                }
                return Ok(self.direct_sum(comps));
            }
        }
        let mut uniq: Vec<Domain> = Vec::new();
        for d in items {
            if !uniq.contains(&d) {
                uniq.push(d);
            }
        }
        // drop any member that contains another
        let mut i = 0;
        while i < uniq.len() {
            let mut dropped = false;
            for j in 0..uniq.len() {
                if i != j && self.subset(&uniq[j], &uniq[i], t)? {
                    uniq.remove(i);
                    dropped = true;
                    break;
                }
            }
            if !dropped {
                i += 1;
            }
        }
        for a in 0..uniq.len() {
            for b in a + 1..uniq.len() {
                if self.trivial_pair(&uniq[a], &uniq[b], t)? {
                    return Ok(Domain::Trivial);
                }
            }
        }
        if uniq.len() == 1 {
            return Ok(uniq.pop().expect("one"));
        }
        uniq.sort_by_cached_key(|d| d.to_string());
        Ok(Domain::Intersect(uniq))
    }

    fn trivial_pair(&self, a: &Domain, b: &Domain, t: &mut Trail) -> Result<bool> {
        for f in &self.facts {
            if f.kind != FactKind::TrivialIntersection {
                continue;
            }
            let mut scratch = Trail::new();
            let forward = self.subset(a, &f.left_dom, &mut scratch)?
                && self.subset(b, &f.right_dom, &mut scratch)?;
            let backward = !forward
                && self.subset(a, &f.right_dom, &mut scratch)?
                && self.subset(b, &f.left_dom, &mut scratch)?;
            if forward || backward {
                t.merge(&scratch);
                t.record(f);
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Certified inclusion `a ⊆ b`; `false` means "not certified".
    pub fn subset(&self, a: &Domain, b: &Domain, t: &mut Trail) -> Result<bool> {
        if a == b || *a == Domain::Trivial || *b == Domain::Full {
            return Ok(true);
        }
        Ok(match (a, b) {
            (_, Domain::Intersect(v)) => {
                for d in v {
                    if !self.subset(a, d, t)? {
                        return Ok(false);
                    }
                }
                true
            }
            (Domain::Intersect(v), _) => {
                for d in v {
                    if self.subset(d, b, t)? {
                        return Ok(true);
                    }
                }
                false
            }
            (Domain::DirectSum(u), Domain::DirectSum(v)) if u.len() == v.len() => {
                for (x, y) in u.iter().zip(v) {
                    if !self.subset(x, y, t)? {
                        return Ok(false);
                    }
                }
                true
            }
            (Domain::MaxDom(phi), Domain::MaxDom(psi)) => psi.dominates(phi) == Dominance::Yes,
            (Domain::Axiom { sym: s, power: p }, Domain::Axiom { sym: r, power: q }) if s == r => {
                q.is_zero() || (p.signum() == q.signum() && q.abs() <= p.abs())
            }
            (Domain::Preimage { op, target: x }, _) => {
                if let Domain::Preimage { op: op2, target: y } = b {
                    if op == op2 && self.subset(x, y, t)? {
                        return Ok(true);
                    }
                }
                let d = self.domain(op, t)?;
                d != *a && self.subset(&d, b, t)?
            }
            _ => false,
        })
    }

    pub fn density(&self, d: &Domain, t: &mut Trail) -> Result<Tri> {
        let d = self.simplify_domain(d, t)?;
        Ok(match &d {
            Domain::Full | Domain::MaxDom(_) => Tri::Yes,
            Domain::Trivial => Tri::No,
            Domain::Axiom { sym, power } => {
                let p = sym.props;
                if p.selfadjoint || (power.is_one() && p.densely_defined) {
                    Tri::Yes
                } else {
                    Tri::Unknown
                }
            }
            Domain::Preimage { op, target } if matches!(**op, Op::Transform { .. }) => {
                self.density(target, t)?
            }
            Domain::DirectSum(v) => {
                let mut all = Tri::Yes;
                for x in v {
                    match self.density(x, t)? {
                        Tri::No => return Ok(Tri::No),
                        Tri::Unknown => all = Tri::Unknown,
                        Tri::Yes => {}
                    }
                }
                all
            }
            _ => Tri::Unknown,
        })
    }

    fn proper(&self, d: &Domain) -> Tri {
        match d {
            Domain::MaxDom(phi) => match phi.growth_class() {
                Growth::Unbounded { .. } => Tri::Yes,
                Growth::Bounded(_) => Tri::No,
                Growth::Unknown => {
                    if phi.to_poly().is_some() {
                        Tri::Yes
                    } else {
                        Tri::Unknown
                    }
                }
            },
            Domain::Axiom { sym, power } => {
                let p = sym.props;
                if (power.is_positive() && p.unbounded) || (power.is_negative() && p.unbounded_inverse) {
                    Tri::Yes
                } else {
                    Tri::Unknown
                }
            }
            Domain::Preimage { op, target } if matches!(**op, Op::Transform { .. }) => {
                self.proper(target)
            }
            _ => Tri::Unknown,
        }
    }

    /// Is `d` a closed subspace?
    pub fn closed_subspace(&self, d: &Domain, t: &mut Trail) -> Result<Tri> {
        let d = self.simplify_domain(d, t)?;
        Ok(match &d {
            Domain::Full | Domain::Trivial => Tri::Yes,
            Domain::DirectSum(v) => {
                let mut all = Tri::Yes;
                for x in v {
                    match self.closed_subspace(x, t)? {
                        Tri::No => return Ok(Tri::No),
                        Tri::Unknown => all = Tri::Unknown,
                        Tri::Yes => {}
                    }
                }
                all
            }
            other => {
                if self.density(other, t)? == Tri::Yes && self.proper(other) == Tri::Yes {
                    Tri::No
                } else {
                    Tri::Unknown
                }
            }
        })
    }
}

/// Multiplier powers combine when their modulus flags agree; even integer
/// powers agree with anything.
fn combinable(p: &AxiomPower, q: &AxiomPower) -> Option<bool> {
    if is_even_integer(p.power) {
        Some(q.modulus)
    } else if is_even_integer(q.power) || p.modulus == q.modulus {
        Some(p.modulus)
    } else {
        None
    }
}

/// MaxDom depends only on the growth at infinity: keep the dominant
/// monomial of an exp-polynomial with unit coefficient.
fn canonical_maxdom(phi: &Scalar) -> Domain {
    let s = phi.simplify();
    if let Some(p) = s.to_poly() {
        return match p.terms.keys().next_back() {
            Some(&(a, k)) if (a, k) > (Rational64::zero(), 0) => {
                let mut top = crate::scalar::ExpPoly::default();
                top.terms.insert((a, k), 1.0);
                Domain::MaxDom(Scalar::from_poly(&top))
            }
            _ => Domain::Full,
        };
    }
    match s.growth_class() {
        Growth::Bounded(_) => Domain::Full,
        _ => Domain::MaxDom(s),
    }
}

// -------------------------------------------------------------------
// untraced conveniences over a fact-free engine

pub fn compose(s: &Op, t: &Op) -> Result<Op> {
    let e = Engine::new();
    let mut tr = Trail::new();
    let s = e.normalize(s, &mut tr)?;
    let t = e.normalize(t, &mut tr)?;
    e.compose(s, t, &mut tr)
}

pub fn adjoint(op: &Op) -> Result<Op> {
    let e = Engine::new();
    let mut tr = Trail::new();
    let op = e.normalize(op, &mut tr)?;
    e.adjoint(&op, &mut tr)
}

pub fn modulus(op: &Op) -> Result<Op> {
    let e = Engine::new();
    let mut tr = Trail::new();
    let op = e.normalize(op, &mut tr)?;
    e.modulus(&op, &mut tr)
}

pub fn commutator(a: &Op, b: &Op) -> Result<Op> {
    let e = Engine::new();
    let mut tr = Trail::new();
    let a = e.normalize(a, &mut tr)?;
    let b = e.normalize(b, &mut tr)?;
    e.commutator(&a, &b, &mut tr)
}

pub fn self_commutator(op: &Op) -> Result<Op> {
    let e = Engine::new();
    let mut tr = Trail::new();
    let op = e.normalize(op, &mut tr)?;
    e.self_commutator(&op, &mut tr)
}

pub fn domain(op: &Op) -> Result<Domain> {
    let e = Engine::new();
    let mut tr = Trail::new();
    let op = e.normalize(op, &mut tr)?;
    e.domain(&op, &mut tr)
}

pub fn block_simplify(op: &Op) -> Result<Op> {
    Engine::new().normalize(op, &mut Trail::new())
}

pub fn intersect(a: &Domain, b: &Domain) -> Result<Domain> {
    Engine::new().intersect(&[a.clone(), b.clone()], &mut Trail::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::op::Props;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    fn gauss(a: Rational64) -> Scalar {
        Scalar::gaussian_exp(a)
    }

    fn m(a: Rational64) -> Op {
        Op::Mult(gauss(a))
    }

    fn b_op() -> Op {
        Op::Block(vec![
            vec![Op::zero_full(), m(r(1, 1))],
            vec![Op::zero_full(), Op::zero_full()],
        ])
    }

    fn maxdom(a: Rational64) -> Domain {
        Domain::MaxDom(gauss(a))
    }

    fn sym(name: &str, props: &[&str]) -> Arc<AxiomSym> {
        let mut p = Props::default();
        for n in props {
            assert!(p.set(n));
        }
        AxiomSym::new(name, p)
    }

    fn ax(s: &Arc<AxiomSym>, p: Rational64) -> Op {
        Op::Axiom(AxiomPower::new(s.clone(), p, false))
    }

    #[test]
    fn b_squared_is_zero_on_h_plus_da() {
        let b = b_op();
        let sq = compose(&b, &b).unwrap();
        assert_eq!(sq, Op::Zero(Domain::DirectSum(vec![Domain::Full, maxdom(r(1, 1))])));
    }

    #[test]
    fn modulus_of_b_and_products() {
        let b = b_op();
        let abs_b = modulus(&b).unwrap();
        assert_eq!(abs_b, Op::diag(vec![Op::zero_full(), m(r(1, 1))]));
        let bb = compose(&b, &abs_b).unwrap();
        assert_eq!(
            bb,
            Op::Block(vec![
                vec![Op::zero_full(), m(r(2, 1))],
                vec![Op::zero_full(), Op::zero_full()],
            ])
        );
        let bb2 = compose(&abs_b, &b).unwrap();
        assert_eq!(bb2, Op::Zero(Domain::DirectSum(vec![Domain::Full, maxdom(r(1, 1))])));
    }

    #[test]
    fn mult_chain_domain() {
        let phi = gauss(r(1, 1));
        let sqrt_phi = Op::Mult(phi.clone().sqrt().unwrap());
        let phi_sq = Op::Mult(phi.pow(r(2, 1)).unwrap());
        let c = compose(&sqrt_phi, &phi_sq).unwrap();
        assert_eq!(c, m(r(5, 2)));
        assert_eq!(domain(&c).unwrap(), maxdom(r(5, 2)));
    }

    #[test]
    fn identity_and_zero_rules() {
        let t = m(r(1, 1));
        assert_eq!(compose(&Op::Identity, &t).unwrap(), t);
        assert_eq!(modulus(&Op::zero_full()).unwrap(), Op::zero_full());
        assert_eq!(adjoint(&Op::Identity).unwrap(), Op::Identity);
        assert_eq!(commutator(&Op::Identity, &t).unwrap(), Op::Zero(maxdom(r(1, 1))));
        assert_eq!(commutator(&t, &t).unwrap(), Op::Zero(maxdom(r(2, 1))));
        assert_eq!(self_commutator(&t).unwrap(), Op::Zero(maxdom(r(2, 1))));
    }

    #[test]
    fn anti_diagonal_adjoint_and_modulus() {
        let q = m(r(1, 4));
        let t = Op::Block(vec![vec![Op::zero_full(), q.clone()], vec![q.clone(), Op::zero_full()]]);
        assert_eq!(modulus(&t).unwrap(), Op::diag(vec![q.clone(), q]));
        let low = Op::Block(vec![vec![Op::zero_full(), Op::zero_full()], vec![m(r(1, 1)), Op::zero_full()]]);
        let twice = adjoint(&adjoint(&low).unwrap()).unwrap();
        assert_eq!(twice, low);
    }

    #[test]
    fn self_commutator_examples() {
        let low = Op::Block(vec![vec![Op::zero_full(), Op::zero_full()], vec![m(r(1, 1)), Op::zero_full()]]);
        let sc = self_commutator(&low).unwrap();
        let neg = Op::Mult(block_simplify(&Op::Mult(-gauss(r(2, 1)))).map(|o| match o {
            Op::Mult(s) => s,
            _ => unreachable!(),
        }).unwrap());
        assert_eq!(sc, Op::diag(vec![neg, m(r(2, 1))]));

        let alpha = gauss(r(1, 1));
        let beta = gauss(r(1, 2));
        let t = Op::Block(vec![
            vec![Op::zero_full(), Op::Mult(alpha.clone().sqrt().unwrap())],
            vec![Op::Mult(beta.clone().sqrt().unwrap()), Op::zero_full()],
        ]);
        let sc = self_commutator(&t).unwrap();
        let e = Engine::new();
        let expect = Op::diag(vec![
            e.mult(&(alpha.clone() - beta.clone())),
            e.mult(&(beta - alpha)),
        ]);
        assert_eq!(sc, expect);
    }

    #[test]
    fn lemma_commutator_with_axiom_entry() {
        let tsym = sym("T", &["selfadjoint", "unbounded"]);
        let t1 = ax(&tsym, r(1, 1));
        let a = Op::Block(vec![vec![Op::zero_full(), t1.clone()], vec![t1.clone(), Op::zero_full()]]);
        let b = Op::diag(vec![t1.clone(), Op::scale(-1.0, t1)]);
        let c = commutator(&a, &b).unwrap();
        let t2 = ax(&tsym, r(2, 1));
        assert_eq!(
            c,
            Op::Block(vec![
                vec![Op::zero_full(), Op::scale(-2.0, t2.clone())],
                vec![Op::scale(2.0, t2), Op::zero_full()],
            ])
        );
    }

    #[test]
    fn declared_facts_trivialize() {
        let c = sym("C", &["positive", "unbounded"]);
        let d = sym("D", &["selfadjoint", "unbounded"]);
        let mut e = Engine::new();
        e.add_fact("mmm", FactKind::TrivialComposition, &ax(&c, r(1, 1)), &ax(&d, r(1, 1)))
            .unwrap();
        let mut t = Trail::new();
        let cd = e.compose(ax(&c, r(1, 1)), ax(&d, r(1, 1)), &mut t).unwrap();
        assert!(t.uses.is_empty());
        assert_eq!(e.domain(&cd, &mut t).unwrap(), Domain::Trivial);
        assert!(t.cites("mmm"));

        let a = sym("A", &["selfadjoint", "unbounded"]);
        let b = sym("B", &["selfadjoint", "unbounded"]);
        e.add_fact("kos", FactKind::TrivialIntersection, &ax(&a, r(1, 1)), &ax(&b, r(1, 1)))
            .unwrap();
        let mut t = Trail::new();
        let dom_a = e.axiom_domain(&a, r(1, 1));
        let dom_b2 = e.axiom_domain(&b, r(2, 1));
        assert_eq!(e.intersect(&[dom_a, dom_b2], &mut t).unwrap(), Domain::Trivial);
        assert!(t.cites("kos"));
    }

    #[test]
    fn intersections() {
        assert_eq!(intersect(&maxdom(r(1, 1)), &maxdom(r(1, 4))).unwrap(), maxdom(r(1, 1)));
        assert_eq!(intersect(&Domain::Trivial, &maxdom(r(1, 1))).unwrap(), Domain::Trivial);
        let err = intersect(
            &Domain::DirectSum(vec![Domain::Full, maxdom(r(1, 1))]),
            &Domain::DirectSum(vec![Domain::Full, Domain::Full, maxdom(r(1, 1))]),
        );
        assert!(matches!(err, Err(AlgebraError::AmbientMismatch { .. })));
    }

    #[test]
    fn zero_on_trivial_has_no_adjoint() {
        let z = Op::Zero(Domain::DirectSum(vec![Domain::Trivial, Domain::Trivial]));
        assert!(matches!(adjoint(&z), Err(AlgebraError::NotDenselyDefined(_))));
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let b = b_op();
        assert!(matches!(compose(&b, &m(r(1, 1))), Err(AlgebraError::ShapeMismatch { .. })));
    }

    #[test]
    fn fourier_domains_are_monotone() {
        let e = Engine::new();
        let mut t = Trail::new();
        let big = e.domain(&Op::fourier(m(r(1, 2))), &mut t).unwrap();
        let small = e.domain(&Op::fourier(m(r(1, 4))), &mut t).unwrap();
        assert!(e.subset(&big, &small, &mut t).unwrap());
        assert!(!e.subset(&small, &big, &mut t).unwrap());
        assert_eq!(e.density(&big, &mut t).unwrap(), Tri::Yes);
        assert_eq!(e.closed_subspace(&big, &mut t).unwrap(), Tri::No);
    }
}
