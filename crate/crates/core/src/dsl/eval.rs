use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;
use serde::Serialize;

use super::ast::{Expr, Func, ProbeMode, Program, Stmt};
use crate::classify::{Classifier, Property, Rule, Target, Value, Verdict};
use crate::engine::{AlgebraError, Engine, Trail};
use crate::gaussian::{self, BlowupTable, BlowupVerdict};
use crate::numerics::{self, GridSpec, GrowthOutcome, GrowthReport, TrivialityTable};
use crate::op::{AxiomPower, AxiomSym, Domain, Op, Props};
use crate::scalar::{Scalar, ScalarError};

#[derive(Clone, Debug, PartialEq)]
pub enum Val {
    Scalar(Scalar),
    Op(Op),
    Domain(Domain),
}

impl Val {
    fn kind(&self) -> &'static str {
        match self {
            Val::Scalar(_) => "scalar",
            Val::Op(_) => "operator",
            Val::Domain(_) => "domain",
        }
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Scalar(s) => write!(f, "{s}"),
            Val::Op(o) => write!(f, "{o}"),
            Val::Domain(d) => write!(f, "{d}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("`{0}` is not bound")]
    Unbound(String),
    #[error("`{0}` is already bound")]
    Rebinding(String),
    #[error("{context} expects {expected}, got {found} `{value}`")]
    Type {
        context: String,
        expected: &'static str,
        found: &'static str,
        value: String,
    },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

type Result<T> = std::result::Result<T, EvalError>;

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "probe", rename_all = "snake_case")]
pub enum Evidence {
    Grid { report: GrowthReport },
    Gauss { table: BlowupTable },
    Triviality { table: TrivialityTable },
    /// The probe was requested but could not run.
    Failed { strategy: String, reason: String },
}

impl Evidence {
    /// Does this evidence speak against the verdict?
    pub fn contradicts(&self, v: &Verdict) -> bool {
        match (self, v.property, v.value) {
            (Evidence::Grid { report }, Property::Boundedness, value) => matches!(
                (&report.outcome, value),
                (GrowthOutcome::Growing { .. }, Value::Affirmed)
                    | (GrowthOutcome::StabilizedBounded { .. }, Value::Refuted)
            ),
            (Evidence::Gauss { table }, Property::Boundedness, Value::Affirmed) => {
                table.verdict == BlowupVerdict::UnboundedEvidence
            }
            (Evidence::Triviality { table }, Property::DomainTriviality, Value::Refuted) => {
                table.verdict == numerics::TrivialityVerdict::EvidenceOfTriviality
            }
            _ => false,
        }
    }

    /// The value this evidence points to for `property`, if any.
    pub fn suggests(&self, property: Property) -> Option<Value> {
        match (self, property) {
            (Evidence::Grid { report }, Property::Boundedness) => match report.outcome {
                GrowthOutcome::Growing { .. } => Some(Value::Refuted),
                GrowthOutcome::StabilizedBounded { .. } => Some(Value::Affirmed),
                GrowthOutcome::Inconclusive { .. } => None,
            },
            (Evidence::Gauss { table }, Property::Boundedness) => {
                (table.verdict == BlowupVerdict::UnboundedEvidence).then_some(Value::Refuted)
            }
            (Evidence::Triviality { table }, Property::DomainTriviality) => {
                (table.verdict == numerics::TrivialityVerdict::EvidenceOfTriviality).then_some(Value::Affirmed)
            }
            _ => None,
        }
    }

    pub fn summary(&self) -> String {
        match self {
            Evidence::Grid { report } => match &report.outcome {
                GrowthOutcome::StabilizedBounded { limit } => format!("grid: stabilized bounded, norm -> {limit:.6}"),
                GrowthOutcome::Growing { factors } => {
                    let fs: Vec<String> = factors.iter().map(|f| format!("{f:.3}")).collect();
                    format!("grid: growing, factors [{}]", fs.join(", "))
                }
                GrowthOutcome::Inconclusive { reason } => format!("grid: inconclusive ({reason})"),
            },
            Evidence::Gauss { table } => {
                let rs: Vec<String> = table
                    .rows
                    .iter()
                    .map(|r| r.ratio.map_or("-".to_string(), |x| format!("{x:.4}")))
                    .collect();
                let v = match table.verdict {
                    BlowupVerdict::UnboundedEvidence => "unbounded evidence",
                    BlowupVerdict::Inconclusive => "inconclusive",
                };
                format!("gauss: {v}, ratios [{}]", rs.join(", "))
            }
            Evidence::Triviality { table } => {
                let ms: Vec<String> = table.rows.iter().map(|r| format!("{:.4}", r.min_eigenvalue)).collect();
                let v = match table.verdict {
                    numerics::TrivialityVerdict::EvidenceOfTriviality => "EVIDENCE of triviality",
                    numerics::TrivialityVerdict::Inconclusive => "EVIDENCE inconclusive",
                };
                format!("triviality: {v}, minima [{}]", ms.join(", "))
            }
            Evidence::Failed { strategy, reason } => format!("{strategy}: not applicable ({reason})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExecOptions {
    /// Used by checks that do not name a probe.
    pub probe: ProbeMode,
    pub scales: Vec<GridSpec>,
    pub schedule: Vec<f64>,
    /// Stabilization band for the grid probe.
    pub tolerance: f64,
    pub rules: Option<BTreeSet<Rule>>,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions {
            probe: ProbeMode::None,
            scales: GridSpec::default_ladder(),
            schedule: gaussian::DEFAULT_SCHEDULE.to_vec(),
            tolerance: numerics::STABLE_BAND,
            rules: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub line: usize,
    pub source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normal_form: Option<String>,
    pub verdicts: Vec<Verdict>,
    pub evidence: Vec<Evidence>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckReport {
    /// No evidence contradicts a symbolic verdict.
    pub fn coherent(&self) -> bool {
        !self
            .verdicts
            .iter()
            .any(|v| self.evidence.iter().any(|e| e.contradicts(v)))
    }

    pub fn verdict(&self, p: Property) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.property == p)
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ProgramReport {
    pub checks: Vec<CheckReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

impl ProgramReport {
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!("## `{}` (line {})\n\n", c.source, c.line));
            if let Some(nf) = &c.normal_form {
                out.push_str(&format!("normal form: `{nf}`\n\n"));
            }
            for v in &c.verdicts {
                out.push_str(&format!("- {}: **{}**", v.property.keyword(), v.words()));
                let rules: Vec<&str> = v.provenance.iter().map(|s| s.rule.name()).collect();
                if !rules.is_empty() {
                    out.push_str(&format!(" via {}", rules.join(" > ")));
                }
                if let Some(n) = &v.note {
                    out.push_str(&format!(" ({n})"));
                }
                out.push('\n');
            }
            for e in &c.evidence {
                out.push_str(&format!("- {}\n", e.summary()));
            }
            if let Some(err) = &c.error {
                out.push_str(&format!("- error: {err}\n"));
            }
            out.push('\n');
        }
        for e in &self.errors {
            out.push_str(&format!("error: {e}\n"));
        }
        out
    }
}

/// Evaluation state: declared symbols, bindings, facts.
#[derive(Clone, Debug, Default)]
pub struct Session {
    engine: Engine,
    axioms: BTreeMap<String, Arc<AxiomSym>>,
    bindings: BTreeMap<String, Expr>,
    cache: BTreeMap<String, std::result::Result<Val, EvalError>>,
}

fn type_error(context: &str, expected: &'static str, v: &Val) -> EvalError {
    EvalError::Type {
        context: context.to_string(),
        expected,
        found: v.kind(),
        value: v.to_string(),
    }
}

fn neg(op: Op) -> Op {
    Op::scale(-1.0, op)
}

impl Session {
    pub fn new() -> Self {
        Session::default()
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn engine_mut(&mut self) -> &mut Engine {
        &mut self.engine
    }

    pub fn names(&self) -> BTreeSet<String> {
        self.axioms.keys().chain(self.bindings.keys()).cloned().collect()
    }

    pub fn axiom(&self, name: &str) -> Option<&Arc<AxiomSym>> {
        self.axioms.get(name)
    }

    fn fresh(&self, name: &str) -> Result<()> {
        if self.axioms.contains_key(name) || self.bindings.contains_key(name) {
            return Err(EvalError::Rebinding(name.to_string()));
        }
        Ok(())
    }

    pub fn declare_axiom(&mut self, name: &str, props: &[String]) -> Result<Arc<AxiomSym>> {
        self.fresh(name)?;
        let mut p = Props::default();
        for n in props {
            p.set(n);
        }
        let sym = AxiomSym::new(name, p);
        self.axioms.insert(name.to_string(), sym.clone());
        Ok(sym)
    }

    pub fn bind(&mut self, name: &str, expr: Expr) -> Result<()> {
        self.fresh(name)?;
        self.bindings.insert(name.to_string(), expr);
        Ok(())
    }

    /// Run a statement that is not a check.
    pub fn declare(&mut self, s: &Stmt) -> Result<()> {
        match s {
            Stmt::Bind { name, expr, .. } => self.bind(name, expr.clone()),
            Stmt::Axiom { name, props, .. } => self.declare_axiom(name, props).map(|_| ()),
            Stmt::Fact { label, kind, left, right, .. } => {
                let l = self.eval_op(left)?;
                let r = self.eval_op(right)?;
                self.engine.add_fact(label, *kind, &l, &r)?;
                Ok(())
            }
            Stmt::Check { .. } => Ok(()),
        }
    }

    pub fn execute(&mut self, prog: &Program, opts: &ExecOptions) -> ProgramReport {
        let mut report = ProgramReport::default();
        for s in &prog.stmts {
            match s {
                Stmt::Check { expr, props, probe, pos } => {
                    let props: Vec<Property> = props.iter().filter_map(|p| Property::from_keyword(p)).collect();
                    let mode = probe.unwrap_or(opts.probe);
                    let mut c = self.check(expr, &props, mode, opts);
                    c.line = pos.line;
                    report.checks.push(c);
                }
                other => {
                    if let Err(e) = self.declare(other) {
                        report.errors.push(format!("{other}: {e}"));
                    }
                }
            }
        }
        report
    }

    /// Classify `expr` for `props` (all applicable ones when empty) and run
    /// the probes `mode` asks for.
    pub fn check(&mut self, expr: &Expr, props: &[Property], mode: ProbeMode, opts: &ExecOptions) -> CheckReport {
        let mut report = CheckReport {
            line: 0,
            source: expr.to_string(),
            normal_form: None,
            verdicts: Vec::new(),
            evidence: Vec::new(),
            error: None,
        };
        let target = match self.eval(expr) {
            Ok(Val::Op(o)) => Target::Op(o),
            Ok(Val::Domain(d)) => Target::Domain(d),
            Ok(Val::Scalar(s)) => match scalar_op(&s) {
                Some(o) => Target::Op(o),
                None => {
                    report.error = Some(type_error("check", "operator or domain", &Val::Scalar(s)).to_string());
                    return report;
                }
            },
            Err(e) => {
                report.error = Some(e.to_string());
                return report;
            }
        };
        let mut t = Trail::new();
        report.normal_form = match &target {
            Target::Op(o) => self.engine.normalize(o, &mut t).map(|o| o.to_string()),
            Target::Domain(d) => self.engine.simplify_domain(d, &mut t).map(|d| d.to_string()),
        }
        .map_err(|e| report.error = Some(e.to_string()))
        .ok();
        let props: Vec<Property> = if props.is_empty() {
            match target {
                Target::Op(_) => vec![Property::Boundedness, Property::Closedness, Property::SelfAdjointness],
                Target::Domain(_) => vec![Property::Density, Property::DomainTriviality],
            }
        } else {
            props.to_vec()
        };
        let classifier = match &opts.rules {
            Some(r) => Classifier::restricted(&self.engine, r.clone()),
            None => Classifier::new(&self.engine),
        };
        for p in &props {
            report.verdicts.push(classifier.classify(*p, &target));
        }
        if mode.grid() {
            report.evidence.push(self.grid_probe(&target, opts));
        }
        if mode.gauss() {
            report.evidence.push(self.gauss_probe(&target, opts));
        }
        report
    }

    pub fn grid_probe(&self, target: &Target, opts: &ExecOptions) -> Evidence {
        let failed = |reason: String| Evidence::Failed {
            strategy: "grid".into(),
            reason,
        };
        match target {
            Target::Op(o) => {
                let mut t = Trail::new();
                let op = match self.engine.normalize(o, &mut t) {
                    Ok(op) => op,
                    Err(e) => return failed(e.to_string()),
                };
                if op.is_abstract() {
                    return failed("expression involves an axiom symbol".into());
                }
                match numerics::norm_growth_probe_with(&op, &opts.scales, opts.tolerance) {
                    Ok(report) => Evidence::Grid { report },
                    Err(e) => failed(e.to_string()),
                }
            }
            Target::Domain(d) => match self.intersected_pair(d) {
                Some((a, b)) => match numerics::triviality_probe(&a, &b, &opts.scales) {
                    Ok(table) => Evidence::Triviality { table },
                    Err(e) => Evidence::Failed {
                        strategy: "triviality".into(),
                        reason: e.to_string(),
                    },
                },
                None => Evidence::Failed {
                    strategy: "triviality".into(),
                    reason: "the probe needs meet(dom(A), dom(B)) with concrete A and B".into(),
                },
            },
        }
    }

    /// `(A, B)` when `d` is `D(A) ∩ D(B)` for concrete operators.
    fn intersected_pair(&self, d: &Domain) -> Option<(Op, Op)> {
        let Domain::Intersect(v) = d else { return None };
        let [x, y] = v.as_slice() else { return None };
        let as_op = |d: &Domain| -> Option<Op> {
            let op = match d {
                Domain::Of(o) => (**o).clone(),
                Domain::MaxDom(s) => Op::Mult(s.clone()),
                _ => return None,
            };
            let op = self.engine.normalize(&op, &mut Trail::new()).ok()?;
            (!op.is_abstract()).then_some(op)
        };
        Some((as_op(x)?, as_op(y)?))
    }

    pub fn gauss_probe(&self, target: &Target, opts: &ExecOptions) -> Evidence {
        let failed = |reason: String| Evidence::Failed {
            strategy: "gauss".into(),
            reason,
        };
        let Target::Op(o) = target else {
            return failed("the Gaussian probe acts on operators".into());
        };
        let op = match self.engine.normalize(o, &mut Trail::new()) {
            Ok(op) => op,
            Err(e) => return failed(e.to_string()),
        };
        if op.is_abstract() {
            return failed("expression involves an axiom symbol".into());
        }
        match gaussian::blowup_probe(&op, &opts.schedule) {
            Ok(table) => Evidence::Gauss { table },
            Err(e) => failed(e.to_string()),
        }
    }

    pub fn eval_op(&mut self, e: &Expr) -> Result<Op> {
        let v = self.eval(e)?;
        self.to_op("operator position", v)
    }

    fn to_op(&self, context: &str, v: Val) -> Result<Op> {
        match v {
            Val::Op(o) => Ok(o),
            Val::Scalar(s) => scalar_op(&s).ok_or_else(|| type_error(context, "operator", &Val::Scalar(s))),
            other => Err(type_error(context, "operator", &other)),
        }
    }

    fn to_domain(&self, context: &str, v: Val) -> Result<Domain> {
        match v {
            Val::Domain(d) => Ok(d),
            other => Err(type_error(context, "domain", &other)),
        }
    }

    fn to_scalar(&self, context: &str, v: Val) -> Result<Scalar> {
        match v {
            Val::Scalar(s) => Ok(s),
            other => Err(type_error(context, "scalar", &other)),
        }
    }

    fn lookup(&mut self, name: &str) -> Result<Val> {
        if let Some(sym) = self.axioms.get(name) {
            return Ok(Val::Op(Op::Axiom(AxiomPower::new(sym.clone(), Rational64::from_integer(1), false))));
        }
        if let Some(v) = self.cache.get(name) {
            return v.clone();
        }
        let Some(e) = self.bindings.get(name).cloned() else {
            return Err(EvalError::Unbound(name.to_string()));
        };
        let v = self.eval(&e);
        self.cache.insert(name.to_string(), v.clone());
        v
    }

    fn normalized(&self, op: &Op) -> Result<Op> {
        Ok(self.engine.normalize(op, &mut Trail::new())?)
    }

    pub fn eval(&mut self, e: &Expr) -> Result<Val> {
        Ok(match e {
            Expr::Var => Val::Scalar(Scalar::x()),
            Expr::Num(c) => Val::Scalar(Scalar::constant(*c)),
            Expr::Ident(name, _) => self.lookup(name)?,
            Expr::Ft => Val::Op(Op::ft()),
            Expr::Ift => Val::Op(Op::ift()),
            Expr::Id => Val::Op(Op::Identity),
            Expr::Full => Val::Domain(Domain::Full),
            Expr::Trivial => Val::Domain(Domain::Trivial),
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let sub = matches!(e, Expr::Sub(..));
                match (self.eval(a)?, self.eval(b)?) {
                    (Val::Scalar(x), Val::Scalar(y)) => {
                        Val::Scalar(if sub { Scalar::Sub(x.into(), y.into()) } else { Scalar::Add(x.into(), y.into()) })
                    }
                    (x, y) => {
                        let ctx = if sub { "`-`" } else { "`+`" };
                        let x = self.to_op(ctx, x)?;
                        let y = self.to_op(ctx, y)?;
                        Val::Op(Op::Sum(vec![x, if sub { neg(y) } else { y }]))
                    }
                }
            }
            Expr::Mul(a, b) => match (self.eval(a)?, self.eval(b)?) {
                (Val::Scalar(x), Val::Scalar(y)) => Val::Scalar(Scalar::Mul(x.into(), y.into())),
                (Val::Scalar(s), Val::Op(o)) | (Val::Op(o), Val::Scalar(s)) if constant(&s).is_some() => {
                    Val::Op(Op::scale(constant(&s).unwrap_or(1.0), o))
                }
                (x, y) => {
                    let x = self.to_op("`*`", x)?;
                    let y = self.to_op("`*`", y)?;
                    Val::Op(Op::compose(x, y))
                }
            },
            Expr::Div(a, b) => match (self.eval(a)?, self.eval(b)?) {
                (Val::Scalar(x), Val::Scalar(y)) => Val::Scalar(Scalar::Div(x.into(), y.into())),
                (Val::Op(o), Val::Scalar(s)) if constant(&s).is_some_and(|c| c != 0.0) => {
                    Val::Op(Op::scale(1.0 / constant(&s).unwrap_or(1.0), o))
                }
                (_, y) => return Err(type_error("`/`", "nonzero constant divisor", &y)),
            },
            Expr::Neg(a) => match self.eval(a)? {
                Val::Scalar(s) => Val::Scalar(Scalar::Neg(s.into())),
                other => Val::Op(neg(self.to_op("`-`", other)?)),
            },
            Expr::Pow(b, r) => match self.eval(b)? {
                Val::Scalar(s) => Val::Scalar(s.pow(*r)?),
                other => {
                    let op = self.to_op("`^`", other)?;
                    let op = self.normalized(&op)?;
                    Val::Op(self.engine.power(&op, *r, &mut Trail::new())?)
                }
            },
            Expr::ZeroOn(d) => {
                let d = self.eval(d)?;
                Val::Op(Op::Zero(self.to_domain("`zero on`", d)?))
            }
            Expr::Block(rows, _) => {
                let mut out = Vec::with_capacity(rows.len());
                for r in rows {
                    let mut row = Vec::with_capacity(r.len());
                    for x in r {
                        let v = self.eval(x)?;
                        row.push(self.to_op("block entry", v)?);
                    }
                    out.push(row);
                }
                Val::Op(Op::Block(out))
            }
            Expr::Call(f, args, _) => self.call(*f, args)?,
        })
    }

    fn call(&mut self, f: Func, args: &[Expr]) -> Result<Val> {
        let ctx = format!("`{}`", f.name());
        let mut vals = Vec::with_capacity(args.len());
        for a in args {
            vals.push(self.eval(a)?);
        }
        let first = vals[0].clone();
        Ok(match f {
            Func::Exp => Val::Scalar(self.to_scalar(&ctx, first)?.exp()),
            Func::Sqrt => match first {
                Val::Scalar(s) => Val::Scalar(s.sqrt()?),
                other => {
                    let op = self.to_op(&ctx, other)?;
                    let op = self.normalized(&op)?;
                    Val::Op(self.engine.power(&op, Rational64::new(1, 2), &mut Trail::new())?)
                }
            },
            Func::Abs => match first {
                Val::Scalar(s) => Val::Scalar(s.abs()),
                other => Val::Op(Op::modulus(self.to_op(&ctx, other)?)),
            },
            Func::Mult => Val::Op(Op::Mult(self.to_scalar(&ctx, first)?)),
            Func::Fourier => Val::Op(Op::fourier(self.to_op(&ctx, first)?)),
            Func::Adj => Val::Op(Op::adjoint(self.to_op(&ctx, first)?)),
            Func::Comm => {
                let a = self.to_op(&ctx, first)?;
                let b = self.to_op(&ctx, vals[1].clone())?;
                Val::Op(Op::Sum(vec![
                    Op::compose(a.clone(), b.clone()),
                    neg(Op::compose(b, a)),
                ]))
            }
            Func::SelfComm => {
                let t = self.to_op(&ctx, first)?;
                let ts = Op::adjoint(t.clone());
                Val::Op(Op::Sum(vec![
                    Op::compose(t.clone(), ts.clone()),
                    neg(Op::compose(ts, t)),
                ]))
            }
            Func::Dom => Val::Domain(Domain::Of(Box::new(self.to_op(&ctx, first)?))),
            Func::MaxDom => Val::Domain(Domain::MaxDom(self.to_scalar(&ctx, first)?)),
            Func::DSum | Func::Meet => {
                let ds = vals
                    .into_iter()
                    .map(|v| self.to_domain(&ctx, v))
                    .collect::<Result<Vec<_>>>()?;
                Val::Domain(if f == Func::DSum { Domain::DirectSum(ds) } else { Domain::Intersect(ds) })
            }
            Func::Pre => {
                let op = self.to_op(&ctx, first)?;
                let target = self.to_domain(&ctx, vals[1].clone())?;
                Val::Domain(Domain::Preimage {
                    op: Box::new(op),
                    target: Box::new(target),
                })
            }
        })
    }
}

fn constant(s: &Scalar) -> Option<f64> {
    if s.is_constant() {
        s.eval(0.0).ok().filter(|c| c.is_finite())
    } else {
        None
    }
}

/// A constant in operator position: `c·I`, or the everywhere-defined zero.
fn scalar_op(s: &Scalar) -> Option<Op> {
    let c = constant(s)?;
    Some(if c == 0.0 {
        Op::zero_full()
    } else if c == 1.0 {
        Op::Identity
    } else {
        Op::scale(c, Op::Identity)
    })
}

/// Parse, execute, and report.
pub fn run_source(src: &str, opts: &ExecOptions) -> std::result::Result<ProgramReport, super::ParseError> {
    let prog = super::parse(src)?;
    Ok(Session::new().execute(&prog, opts))
}
