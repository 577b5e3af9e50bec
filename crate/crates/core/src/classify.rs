//! Tri-state classification of operators with a replayable provenance.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::engine::{Engine, Trail, Tri};
use crate::op::{Domain, Op};
use crate::scalar::Growth;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Boundedness,
    Closedness,
    Density,
    SelfAdjointness,
    DomainTriviality,
}

impl Property {
    pub const ALL: [Property; 5] = [
        Property::Boundedness,
        Property::Closedness,
        Property::Density,
        Property::SelfAdjointness,
        Property::DomainTriviality,
    ];

    /// DSL spelling.
    pub fn keyword(self) -> &'static str {
        match self {
            Property::Boundedness => "bounded",
            Property::Closedness => "closed",
            Property::Density => "dense",
            Property::SelfAdjointness => "selfadjoint",
            Property::DomainTriviality => "trivial",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Property> {
        Some(match s {
            "bounded" => Property::Boundedness,
            "closed" => Property::Closedness,
            "dense" | "densely_defined" => Property::Density,
            "selfadjoint" => Property::SelfAdjointness,
            "trivial" | "trivial_domain" => Property::DomainTriviality,
            _ => return None,
        })
    }

    fn words(self, value: Value) -> &'static str {
        match (self, value) {
            (_, Value::Unknown) => "undecided",
            (Property::Boundedness, Value::Affirmed) => "bounded",
            (Property::Boundedness, Value::Refuted) => "unbounded",
            (Property::Closedness, Value::Affirmed) => "closed",
            (Property::Closedness, Value::Refuted) => "unclosed",
            (Property::Density, Value::Affirmed) => "densely defined",
            (Property::Density, Value::Refuted) => "not densely defined",
            (Property::SelfAdjointness, Value::Affirmed) => "self-adjoint",
            (Property::SelfAdjointness, Value::Refuted) => "not self-adjoint",
            (Property::DomainTriviality, Value::Affirmed) => "trivial domain",
            (Property::DomainTriviality, Value::Refuted) => "nontrivial domain",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Value {
    Affirmed,
    Refuted,
    Unknown,
}

impl Value {
    pub fn parse(s: &str) -> Option<Value> {
        Some(match s {
            "affirmed" | "yes" | "true" => Value::Affirmed,
            "refuted" | "no" | "false" => Value::Refuted,
            "unknown" => Value::Unknown,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Value::Affirmed => "affirmed",
            Value::Refuted => "refuted",
            Value::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

macro_rules! rules {
    ($($v:ident => $name:literal, $desc:literal;)*) => {
        /// The registered rule set. Verdicts only ever cite these.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum Rule { $($v,)* }

        impl Rule {
            pub const ALL: &'static [Rule] = &[$(Rule::$v,)*];

            pub fn name(self) -> &'static str {
                match self { $(Rule::$v => $name,)* }
            }

            pub fn description(self) -> &'static str {
                match self { $(Rule::$v => $desc,)* }
            }

            pub fn from_name(s: &str) -> Option<Rule> {
                match s { $($name => Some(Rule::$v),)* _ => None }
            }
        }
    };
}

rules! {
    DeclaredFact => "declared_fact", "a declared domain fact about abstract symbols";
    TrivialDomain => "trivially_bounded", "operator defined only on {0}";
    ZeroOperator => "zero_operator", "zero operator on a subspace";
    IdentityOperator => "identity", "identity operator";
    UnitaryTransform => "unitary_transform", "Fourier transform is unitary, not self-adjoint";
    MultiplierGrowth => "multiplier_growth", "M_phi is bounded iff phi is essentially bounded";
    FourierConjugation => "fourier_conjugation", "unitary conjugation preserves the property";
    ScalarMultiple => "scalar_multiple", "nonzero real multiples preserve the property";
    AxiomDeclared => "axiom_declared", "property of a declared symbol under its functional calculus";
    BlockEntries => "block_entries", "block with all entries bounded";
    BlockUnboundedEntry => "block_unbounded_entry", "unbounded entry owning its column domain";
    SumOfBounded => "sum_of_bounded", "finite sum of bounded operators";
    SumUnboundedTerm => "sum_unbounded_term", "unbounded term plus bounded terms defined on its domain";
    SpectralPowerGrowth => "spectral_power_growth", "polynomial in powers of one unbounded positive symbol grows on its spectrum";
    ComposeBounded => "compose_bounded", "product of bounded operators";
    BoundedClosedDomain => "bounded_closed_domain", "bounded operator is closed iff its domain is closed";
    MultiplierClosed => "multiplier_closed", "multiplication operator on its maximal domain is closed";
    ModulusClosed => "modulus_closed", "a modulus is self-adjoint, hence closed";
    FunctionalCalculus => "functional_calculus", "real function of one self-adjoint symbol";
    BlockDirectSum => "block_direct_sum", "one entry per row and column: closed iff each column is";
    DomainDescriptor => "domain_descriptor", "density read off the domain descriptor";
    NotDenselyDefined => "not_densely_defined", "self-adjoint operators are densely defined";
    RealMultiplier => "real_multiplier", "real multiplier on its maximal domain is self-adjoint";
    ModulusSelfAdjoint => "modulus_selfadjoint", "a modulus is self-adjoint";
    BlockAdjointPattern => "block_adjoint_pattern", "adjoint has the transposed sparsity pattern";
    BlockSymmetric => "block_symmetric", "self-adjoint diagonal and mutually adjoint off-diagonal entries";
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub rule: Rule,
    pub subterm: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axiom: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub property: Property,
    pub value: Value,
    pub provenance: Vec<Step>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    pub fn words(&self) -> &'static str {
        self.property.words(self.value)
    }

    pub fn rules(&self) -> BTreeSet<Rule> {
        self.provenance.iter().map(|s| s.rule).collect()
    }

    pub fn axioms(&self) -> BTreeSet<String> {
        self.provenance.iter().filter_map(|s| s.axiom.clone()).collect()
    }

    pub fn cites_axiom(&self, label: &str) -> bool {
        self.provenance.iter().any(|s| s.axiom.as_deref() == Some(label))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.words(), self.value)
    }
}

/// What a verdict is about.
#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    Op(Op),
    Domain(Domain),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Op(o) => write!(f, "{o}"),
            Target::Domain(d) => write!(f, "{d}"),
        }
    }
}

type Ev = (Value, Vec<Step>);

const UNKNOWN: Ev = (Value::Unknown, Vec::new());

fn step(rule: Rule, subterm: &impl fmt::Display) -> Step {
    Step {
        rule,
        subterm: subterm.to_string(),
        axiom: None,
    }
}

fn cite(rule: Rule, subterm: &impl fmt::Display, axiom: &str) -> Step {
    Step {
        rule,
        subterm: subterm.to_string(),
        axiom: Some(axiom.to_string()),
    }
}

fn with(value: Value, mut steps: Vec<Step>, last: Step) -> Ev {
    steps.push(last);
    (value, steps)
}

pub struct Classifier<'a> {
    engine: &'a Engine,
    allowed: Option<BTreeSet<Rule>>,
}

impl<'a> Classifier<'a> {
    pub fn new(engine: &'a Engine) -> Self {
        Classifier { engine, allowed: None }
    }

    /// A classifier that may only fire the given rules.
    pub fn restricted(engine: &'a Engine, rules: BTreeSet<Rule>) -> Self {
        Classifier {
            engine,
            allowed: Some(rules),
        }
    }

    fn ok(&self, r: Rule) -> bool {
        self.allowed.as_ref().is_none_or(|s| s.contains(&r))
    }

    pub fn classify(&self, property: Property, target: &Target) -> Verdict {
        let mut t = Trail::new();
        let (value, steps, note) = match target {
            Target::Op(op) => match self.engine.normalize(op, &mut t) {
                Ok(op) => {
                    let (v, s) = self.dispatch_op(property, &op, &mut t);
                    (v, s, None)
                }
                Err(e) => (Value::Unknown, Vec::new(), Some(e.to_string())),
            },
            Target::Domain(d) => match self.engine.simplify_domain(d, &mut t) {
                Ok(d) => {
                    let (v, s) = match property {
                        Property::Density => self.dense(&d, &mut t),
                        Property::DomainTriviality => self.trivial(&d, &mut t),
                        _ => UNKNOWN,
                    };
                    (v, s, None)
                }
                Err(e) => (Value::Unknown, Vec::new(), Some(e.to_string())),
            },
        };
        self.finish(property, value, steps, &t, note)
    }

    fn finish(&self, property: Property, value: Value, steps: Vec<Step>, t: &Trail, note: Option<String>) -> Verdict {
        if value == Value::Unknown {
            return Verdict {
                property,
                value,
                provenance: Vec::new(),
                note,
            };
        }
        let mut provenance: Vec<Step> = t
            .uses
            .iter()
            .map(|u| Step {
                rule: Rule::DeclaredFact,
                subterm: u.statement.clone(),
                axiom: Some(u.label.clone()),
            })
            .collect();
        provenance.extend(steps);
        Verdict {
            property,
            value,
            provenance,
            note,
        }
    }

    fn dispatch_op(&self, property: Property, op: &Op, t: &mut Trail) -> Ev {
        match property {
            Property::Boundedness => self.bounded(op, t),
            Property::Closedness => self.closed(op, t),
            Property::SelfAdjointness => self.selfadjoint(op, t),
            Property::Density | Property::DomainTriviality => {
                let Ok(d) = self.engine.domain(op, t) else { return UNKNOWN };
                if property == Property::Density {
                    self.dense(&d, t)
                } else {
                    self.trivial(&d, t)
                }
            }
        }
    }

    /// Re-run the rules a verdict cites and nothing else.
    pub fn replay(&self, verdict: &Verdict, target: &Target) -> Verdict {
        Classifier::restricted(self.engine, verdict.rules()).classify(verdict.property, target)
    }

    pub fn classify_bounded(&self, op: &Op) -> Verdict {
        self.classify(Property::Boundedness, &Target::Op(op.clone()))
    }

    pub fn classify_closed(&self, op: &Op) -> Verdict {
        self.classify(Property::Closedness, &Target::Op(op.clone()))
    }

    pub fn classify_selfadjoint(&self, op: &Op) -> Verdict {
        self.classify(Property::SelfAdjointness, &Target::Op(op.clone()))
    }

    /// Density and triviality verdicts for a domain.
    pub fn classify_density(&self, d: &Domain) -> (Verdict, Verdict) {
        let target = Target::Domain(d.clone());
        (
            self.classify(Property::Density, &target),
            self.classify(Property::DomainTriviality, &target),
        )
    }

    // ---------------------------------------------------------------

    fn trivial_domain(&self, op: &Op, t: &mut Trail) -> bool {
        self.ok(Rule::TrivialDomain) && matches!(self.engine.domain(op, t), Ok(Domain::Trivial))
    }

    fn subset(&self, a: &Domain, b: &Domain, t: &mut Trail) -> bool {
        self.engine.subset(a, b, t).unwrap_or(false)
    }

    fn dom(&self, op: &Op, t: &mut Trail) -> Option<Domain> {
        self.engine.domain(op, t).ok()
    }

    fn bounded(&self, op: &Op, t: &mut Trail) -> Ev {
        if self.trivial_domain(op, t) {
            return (Value::Affirmed, vec![step(Rule::TrivialDomain, op)]);
        }
        match op {
            Op::Zero(_) if self.ok(Rule::ZeroOperator) => (Value::Affirmed, vec![step(Rule::ZeroOperator, op)]),
            Op::Identity if self.ok(Rule::IdentityOperator) => {
                (Value::Affirmed, vec![step(Rule::IdentityOperator, op)])
            }
            Op::Transform { .. } if self.ok(Rule::UnitaryTransform) => {
                (Value::Affirmed, vec![step(Rule::UnitaryTransform, op)])
            }
            Op::Mult(phi) if self.ok(Rule::MultiplierGrowth) => match phi.growth_class() {
                Growth::Bounded(_) => (Value::Affirmed, vec![step(Rule::MultiplierGrowth, op)]),
                Growth::Unbounded { .. } => (Value::Refuted, vec![step(Rule::MultiplierGrowth, op)]),
                Growth::Unknown => UNKNOWN,
            },
            Op::Fourier(a) if self.ok(Rule::FourierConjugation) => self.pass(Rule::FourierConjugation, op, self.bounded(a, t)),
            Op::Scale(_, a) if self.ok(Rule::ScalarMultiple) => self.pass(Rule::ScalarMultiple, op, self.bounded(a, t)),
            Op::Axiom(p) if self.ok(Rule::AxiomDeclared) => {
                let props = p.sym.props;
                let spectral = props.selfadjoint || p.power.is_zero() || p.power == num_rational::Rational64::from_integer(1);
                let value = if !spectral {
                    Value::Unknown
                } else if p.power.is_positive() {
                    if props.unbounded {
                        Value::Refuted
                    } else if props.bounded {
                        Value::Affirmed
                    } else {
                        Value::Unknown
                    }
                } else if props.unbounded_inverse {
                    Value::Refuted
                } else if props.boundedly_invertible {
                    Value::Affirmed
                } else {
                    Value::Unknown
                };
                if value == Value::Unknown {
                    UNKNOWN
                } else {
                    (value, vec![cite(Rule::AxiomDeclared, op, &p.sym.name)])
                }
            }
            Op::Block(rows) => self.bounded_block(op, rows, t),
            Op::Sum(ts) => self.bounded_sum(op, ts, t),
            Op::Compose(a, b) if self.ok(Rule::ComposeBounded) => {
                let (va, mut sa) = self.bounded(a, t);
                if va != Value::Affirmed {
                    return UNKNOWN;
                }
                let (vb, sb) = self.bounded(b, t);
                if vb != Value::Affirmed {
                    return UNKNOWN;
                }
                sa.extend(sb);
                with(Value::Affirmed, sa, step(Rule::ComposeBounded, op))
            }
            _ => UNKNOWN,
        }
    }

    fn pass(&self, rule: Rule, op: &Op, (v, s): Ev) -> Ev {
        if v == Value::Unknown {
            UNKNOWN
        } else {
            with(v, s, step(rule, op))
        }
    }

    fn bounded_block(&self, op: &Op, rows: &[Vec<Op>], t: &mut Trail) -> Ev {
        let n = rows.len();
        let mut verdicts = Vec::with_capacity(n * n);
        for row in rows {
            for e in row {
                verdicts.push(self.bounded(e, t));
            }
        }
        if self.ok(Rule::BlockEntries) && verdicts.iter().all(|(v, _)| *v == Value::Affirmed) {
            let steps = verdicts.into_iter().flat_map(|(_, s)| s).collect();
            return with(Value::Affirmed, steps, step(Rule::BlockEntries, op));
        }
        if self.ok(Rule::BlockUnboundedEntry) {
            for i in 0..n {
                for j in 0..n {
                    let (v, s) = &verdicts[i * n + j];
                    if *v != Value::Refuted {
                        continue;
                    }
                    let Some(d) = self.dom(&rows[i][j], t) else { continue };
                    let owns = (0..n).filter(|&k| k != i).all(|k| {
                        self.dom(&rows[k][j], t).is_some_and(|dk| self.subset(&d, &dk, t))
                    });
                    if owns {
                        return with(Value::Refuted, s.clone(), step(Rule::BlockUnboundedEntry, op));
                    }
                }
            }
        }
        UNKNOWN
    }

    fn bounded_sum(&self, op: &Op, ts: &[Op], t: &mut Trail) -> Ev {
        let restricted = ts.iter().any(Op::is_zero);
        if !restricted && self.ok(Rule::SpectralPowerGrowth) {
            if let Some((sym, powers)) = self.engine.functional_calculus(ts) {
                let props = sym.props;
                let live: Vec<_> = powers.iter().filter(|(c, _)| *c != 0.0).map(|(_, p)| *p).collect();
                let top = live.iter().max().copied();
                let bottom = live.iter().min().copied();
                let grows_up = props.positive && props.unbounded && top.is_some_and(|p| p.is_positive());
                let grows_down =
                    props.positive && props.unbounded_inverse && bottom.is_some_and(|p| p.is_negative());
                if grows_up || grows_down {
                    return (Value::Refuted, vec![cite(Rule::SpectralPowerGrowth, op, &sym.name)]);
                }
            }
        }
        let verdicts: Vec<Ev> = ts.iter().map(|x| self.bounded(x, t)).collect();
        if self.ok(Rule::SumOfBounded) && verdicts.iter().all(|(v, _)| *v == Value::Affirmed) {
            let steps = verdicts.into_iter().flat_map(|(_, s)| s).collect();
            return with(Value::Affirmed, steps, step(Rule::SumOfBounded, op));
        }
        if self.ok(Rule::SumUnboundedTerm) {
            let unbounded: Vec<usize> = (0..ts.len()).filter(|&i| verdicts[i].0 == Value::Refuted).collect();
            let rest_bounded = verdicts.iter().filter(|(v, _)| *v == Value::Affirmed).count() == ts.len() - 1;
            if unbounded.len() == 1 && rest_bounded {
                let u = unbounded[0];
                if let Some(du) = self.dom(&ts[u], t) {
                    let covered = (0..ts.len())
                        .filter(|&k| k != u)
                        .all(|k| self.dom(&ts[k], t).is_some_and(|dk| self.subset(&du, &dk, t)));
                    if covered {
                        let steps = verdicts.into_iter().flat_map(|(_, s)| s).collect();
                        return with(Value::Refuted, steps, step(Rule::SumUnboundedTerm, op));
                    }
                }
            }
        }
        UNKNOWN
    }

    fn closed(&self, op: &Op, t: &mut Trail) -> Ev {
        if self.ok(Rule::BoundedClosedDomain) {
            let (vb, sb) = self.bounded(op, t);
            if vb == Value::Affirmed {
                if let Some(d) = self.dom(op, t) {
                    match self.engine.closed_subspace(&d, t) {
                        Ok(Tri::Yes) => return with(Value::Affirmed, sb, step(Rule::BoundedClosedDomain, op)),
                        Ok(Tri::No) => return with(Value::Refuted, sb, step(Rule::BoundedClosedDomain, op)),
                        _ => {}
                    }
                }
            }
        }
        match op {
            Op::Mult(_) if self.ok(Rule::MultiplierClosed) => (Value::Affirmed, vec![step(Rule::MultiplierClosed, op)]),
            Op::Identity | Op::Transform { .. } if self.ok(Rule::BoundedClosedDomain) => {
                (Value::Affirmed, vec![step(Rule::BoundedClosedDomain, op)])
            }
            Op::Fourier(a) if self.ok(Rule::FourierConjugation) => self.pass(Rule::FourierConjugation, op, self.closed(a, t)),
            Op::Scale(_, a) if self.ok(Rule::ScalarMultiple) => self.pass(Rule::ScalarMultiple, op, self.closed(a, t)),
            Op::Axiom(p) if self.ok(Rule::AxiomDeclared) => {
                let props = p.sym.props;
                if props.selfadjoint || (p.power == num_rational::Rational64::from_integer(1) && props.closed) {
                    (Value::Affirmed, vec![cite(Rule::AxiomDeclared, op, &p.sym.name)])
                } else {
                    UNKNOWN
                }
            }
            Op::Modulus(_) if self.ok(Rule::ModulusClosed) => (Value::Affirmed, vec![step(Rule::ModulusClosed, op)]),
            Op::Sum(ts) if self.ok(Rule::FunctionalCalculus) => match self.engine.functional_calculus(ts) {
                Some((sym, _)) => (Value::Affirmed, vec![cite(Rule::FunctionalCalculus, op, &sym.name)]),
                None => UNKNOWN,
            },
            Op::Block(rows) if self.ok(Rule::BlockDirectSum) && Op::is_monomial_block(rows) => {
                let n = rows.len();
                let mut steps = Vec::new();
                for j in 0..n {
                    match (0..n).find(|&i| !rows[i][j].is_zero()) {
                        Some(i) => {
                            if (0..n).any(|k| k != i && rows[k][j] != Op::zero_full()) {
                                return UNKNOWN;
                            }
                            let (v, s) = self.closed(&rows[i][j], t);
                            if v != Value::Affirmed {
                                return UNKNOWN;
                            }
                            steps.extend(s);
                        }
                        None => {
                            let Some(Domain::DirectSum(cols)) = self.dom(op, t) else {
                                return UNKNOWN;
                            };
                            if self.engine.closed_subspace(&cols[j], t) != Ok(Tri::Yes) {
                                return UNKNOWN;
                            }
                        }
                    }
                }
                with(Value::Affirmed, steps, step(Rule::BlockDirectSum, op))
            }
            _ => UNKNOWN,
        }
    }

    fn dense(&self, d: &Domain, t: &mut Trail) -> Ev {
        if !self.ok(Rule::DomainDescriptor) {
            return UNKNOWN;
        }
        match self.engine.density(d, t) {
            Ok(Tri::Yes) => (Value::Affirmed, vec![step(Rule::DomainDescriptor, d)]),
            Ok(Tri::No) => (Value::Refuted, vec![step(Rule::DomainDescriptor, d)]),
            _ => UNKNOWN,
        }
    }

    fn trivial(&self, d: &Domain, t: &mut Trail) -> Ev {
        if !self.ok(Rule::DomainDescriptor) {
            return UNKNOWN;
        }
        if *d == Domain::Trivial {
            return (Value::Affirmed, vec![step(Rule::DomainDescriptor, d)]);
        }
        match self.engine.density(d, t) {
            Ok(Tri::Yes) => (Value::Refuted, vec![step(Rule::DomainDescriptor, d)]),
            _ => UNKNOWN,
        }
    }

    fn selfadjoint(&self, op: &Op, t: &mut Trail) -> Ev {
        if self.ok(Rule::NotDenselyDefined) {
            if let Some(d) = self.dom(op, t) {
                if self.engine.density(&d, t) == Ok(Tri::No) {
                    return (Value::Refuted, vec![step(Rule::NotDenselyDefined, op)]);
                }
            }
        }
        match op {
            Op::Mult(_) if self.ok(Rule::RealMultiplier) => (Value::Affirmed, vec![step(Rule::RealMultiplier, op)]),
            Op::Identity if self.ok(Rule::IdentityOperator) => (Value::Affirmed, vec![step(Rule::IdentityOperator, op)]),
            Op::Transform { .. } if self.ok(Rule::UnitaryTransform) => {
                (Value::Refuted, vec![step(Rule::UnitaryTransform, op)])
            }
            Op::Fourier(a) if self.ok(Rule::FourierConjugation) => {
                self.pass(Rule::FourierConjugation, op, self.selfadjoint(a, t))
            }
            Op::Scale(_, a) if self.ok(Rule::ScalarMultiple) => self.pass(Rule::ScalarMultiple, op, self.selfadjoint(a, t)),
            Op::Axiom(p) if self.ok(Rule::AxiomDeclared) && p.sym.props.selfadjoint => {
                (Value::Affirmed, vec![cite(Rule::AxiomDeclared, op, &p.sym.name)])
            }
            Op::Modulus(_) if self.ok(Rule::ModulusSelfAdjoint) => {
                (Value::Affirmed, vec![step(Rule::ModulusSelfAdjoint, op)])
            }
            Op::Zero(d) if self.ok(Rule::ZeroOperator) => {
                if *d == Domain::Full {
                    (Value::Affirmed, vec![step(Rule::ZeroOperator, op)])
                } else if self.engine.closed_subspace(d, t) == Ok(Tri::No) {
                    (Value::Refuted, vec![step(Rule::ZeroOperator, op)])
                } else {
                    UNKNOWN
                }
            }
            Op::Sum(ts) if self.ok(Rule::FunctionalCalculus) => match self.engine.functional_calculus(ts) {
                Some((sym, _)) => (Value::Affirmed, vec![cite(Rule::FunctionalCalculus, op, &sym.name)]),
                None => UNKNOWN,
            },
            Op::Block(rows) if Op::is_monomial_block(rows) => self.selfadjoint_block(op, rows, t),
            _ => UNKNOWN,
        }
    }

    fn selfadjoint_block(&self, op: &Op, rows: &[Vec<Op>], t: &mut Trail) -> Ev {
        let n = rows.len();
        let nz = |i: usize, j: usize| !rows[i][j].is_zero();
        let symmetric = (0..n).all(|i| (0..n).all(|j| nz(i, j) == nz(j, i)));
        if !symmetric {
            return if self.ok(Rule::BlockAdjointPattern) {
                (Value::Refuted, vec![step(Rule::BlockAdjointPattern, op)])
            } else {
                UNKNOWN
            };
        }
        if !self.ok(Rule::BlockSymmetric) || rows.iter().flatten().any(|e| e.is_zero() && *e != Op::zero_full()) {
            return UNKNOWN;
        }
        let mut steps = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if !nz(i, j) || j < i {
                    continue;
                }
                if i == j {
                    let (v, s) = self.selfadjoint(&rows[i][i], t);
                    if v != Value::Affirmed {
                        return UNKNOWN;
                    }
                    steps.extend(s);
                    continue;
                }
                let Ok(adj) = self.engine.adjoint(&rows[i][j], t) else { return UNKNOWN };
                if adj != rows[j][i] {
                    return UNKNOWN;
                }
                let (v, s) = self.closed(&rows[i][j], t);
                if v != Value::Affirmed {
                    return UNKNOWN;
                }
                steps.extend(s);
            }
        }
        with(Value::Affirmed, steps, step(Rule::BlockSymmetric, op))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::op::{AxiomPower, AxiomSym, Props};
    use crate::scalar::Scalar;
    use num_rational::Rational64;

    fn m(n: i64, d: i64) -> Op {
        Op::Mult(Scalar::gaussian_exp(Rational64::new(n, d)))
    }

    fn value(p: Property, op: &Op) -> Value {
        let e = Engine::new();
        Classifier::new(&e).classify(p, &Target::Op(op.clone())).value
    }

    #[test]
    fn examples_from_the_rule_table() {
        let bbabs = Op::Block(vec![vec![Op::zero_full(), m(2, 1)], vec![Op::zero_full(), Op::zero_full()]]);
        assert_eq!(value(Property::Boundedness, &bbabs), Value::Refuted);
        assert_eq!(value(Property::Closedness, &bbabs), Value::Affirmed);
        let z = Op::Zero(Domain::MaxDom(Scalar::gaussian_exp(Rational64::from_integer(1))));
        assert_eq!(value(Property::Boundedness, &z), Value::Affirmed);
        assert_eq!(value(Property::Closedness, &z), Value::Refuted);
        assert_eq!(value(Property::Closedness, &Op::Identity), Value::Affirmed);
        assert_eq!(value(Property::SelfAdjointness, &m(1, 1)), Value::Affirmed);
        let low = Op::Block(vec![vec![Op::zero_full(), Op::zero_full()], vec![m(1, 1), Op::zero_full()]]);
        assert_eq!(value(Property::SelfAdjointness, &low), Value::Refuted);
    }

    #[test]
    fn antidiagonal_of_selfadjoint_symbol() {
        let mut p = Props::default();
        p.set("selfadjoint");
        p.set("unbounded");
        let s = AxiomSym::new("T", p);
        let t = Op::Axiom(AxiomPower::new(s, Rational64::from_integer(1), false));
        let a = Op::Block(vec![vec![Op::zero_full(), t.clone()], vec![t, Op::zero_full()]]);
        assert_eq!(value(Property::SelfAdjointness, &a), Value::Affirmed);
        assert_eq!(value(Property::Boundedness, &a), Value::Refuted);
    }

    #[test]
    fn trivial_domain_reads() {
        let e = Engine::new();
        let (d, t) = Classifier::new(&e).classify_density(&Domain::Trivial);
        assert_eq!((d.value, t.value), (Value::Refuted, Value::Affirmed));
        let (d, _) = Classifier::new(&e).classify_density(&Domain::MaxDom(Scalar::gaussian_exp(Rational64::from_integer(1))));
        assert_eq!(d.value, Value::Affirmed);
    }

    #[test]
    fn verdicts_replay() {
        let e = Engine::new();
        let c = Classifier::new(&e);
        let target = Target::Op(Op::Block(vec![
            vec![Op::zero_full(), m(2, 1)],
            vec![Op::zero_full(), Op::zero_full()],
        ]));
        for p in Property::ALL {
            let v = c.classify(p, &target);
            assert_eq!(c.replay(&v, &target).value, v.value, "{p:?}");
            if v.value != Value::Unknown {
                assert!(!v.provenance.is_empty());
            }
        }
    }
}
