//! Declarative counterexample scenarios.
//!
//! A scenario file is TOML. Each `[[layer]]` carries a DSL program
//! (symbols and bindings) plus its `[[layer.axiom]]` facts; claims and
//! identities name the layer they are evaluated in, defaulting to the
//! first one.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classify::{Property, Value, Verdict};
use crate::dsl::{self, Evidence, ExecOptions, ProbeMode, Session, Stmt};
use crate::engine::Trail;

const BUILTIN: [(&str, &str); 7] = [
    ("s1.toml", include_str!("../scenarios/s1.toml")),
    ("s2.toml", include_str!("../scenarios/s2.toml")),
    ("s3.toml", include_str!("../scenarios/s3.toml")),
    ("s4.toml", include_str!("../scenarios/s4.toml")),
    ("s5.toml", include_str!("../scenarios/s5.toml")),
    ("s6.toml", include_str!("../scenarios/s6.toml")),
    ("s7.toml", include_str!("../scenarios/s7.toml")),
];

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("{file}: {source}")]
    Toml {
        file: String,
        #[source]
        source: toml::de::Error,
    },
    #[error("{file}: {message}")]
    Invalid { file: String, message: String },
    #[error("unknown scenario `{0}`")]
    UnknownId(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Rule chain only.
    Symbolic,
    /// Rule chain, and the verdict must cite a declared axiom.
    Axiom,
    /// Rule chain cross-checked by truncated norms on the scale ladder.
    Grid,
    /// Gaussian closed-form blowup table.
    Gauss,
    /// Joint quadratic form eigenvalue on the scale ladder.
    Triviality,
}

impl Strategy {
    fn probe(self) -> ProbeMode {
        match self {
            Strategy::Symbolic | Strategy::Axiom => ProbeMode::None,
            Strategy::Grid | Strategy::Triviality => ProbeMode::Grid,
            Strategy::Gauss => ProbeMode::Gauss,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Symbolic => "symbolic",
            Strategy::Axiom => "axiom",
            Strategy::Grid => "grid",
            Strategy::Gauss => "gauss",
            Strategy::Triviality => "triviality",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxiomDecl {
    pub label: String,
    /// `trivial_composition(X, Y)` or `trivial_intersection(X, Y)`.
    pub statement: String,
    pub quote: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub program: String,
    #[serde(default, rename = "axiom")]
    pub axioms: Vec<AxiomDecl>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Identity {
    pub id: String,
    #[serde(default)]
    pub layer: Option<String>,
    pub lhs: String,
    pub rhs: String,
    pub quote: String,
    #[serde(default)]
    pub note: Option<String>,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Claim {
    pub id: String,
    #[serde(default)]
    pub layer: Option<String>,
    pub target: String,
    /// Property keyword: `bounded`, `closed`, `dense`, `selfadjoint`, `trivial`.
    pub property: String,
    /// `affirmed`, `refuted` or `unknown`.
    pub expected: String,
    pub strategy: Strategy,
    pub quote: String,
    /// Observations (`gating = false`) are reported but do not decide the
    /// scenario.
    #[serde(default = "yes")]
    pub gating: bool,
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub title: String,
    pub anchor: String,
    #[serde(default)]
    pub notes: Vec<String>,
    #[serde(rename = "layer")]
    pub layers: Vec<Layer>,
    #[serde(default, rename = "identity")]
    pub identities: Vec<Identity>,
    #[serde(rename = "claim")]
    pub claims: Vec<Claim>,
}

impl Scenario {
    pub fn from_toml(file: &str, src: &str) -> Result<Scenario, ScenarioError> {
        let s: Scenario = toml::from_str(src).map_err(|source| ScenarioError::Toml {
            file: file.to_string(),
            source,
        })?;
        s.validate().map_err(|message| ScenarioError::Invalid {
            file: file.to_string(),
            message,
        })?;
        Ok(s)
    }

    /// Static checks: parseable programs, known keywords, quotes present,
    /// no facts hidden in programs.
    pub fn validate(&self) -> Result<(), String> {
        if self.layers.is_empty() {
            return Err("a scenario needs at least one layer".into());
        }
        let mut names = BTreeSet::new();
        for l in &self.layers {
            if !names.insert(l.name.as_str()) {
                return Err(format!("layer `{}` declared twice", l.name));
            }
            let prog = dsl::parse(&l.program).map_err(|e| format!("layer `{}`: {e}", l.name))?;
            if prog.stmts.iter().any(|s| matches!(s, Stmt::Fact { .. } | Stmt::Check { .. })) {
                return Err(format!(
                    "layer `{}`: facts belong in [[layer.axiom]] and checks in [[claim]]",
                    l.name
                ));
            }
            for a in &l.axioms {
                if a.quote.trim().is_empty() {
                    return Err(format!("axiom `{}` has no quote", a.label));
                }
            }
        }
        let layer_ok = |l: &Option<String>| l.as_ref().is_none_or(|n| names.contains(n.as_str()));
        let mut ids = BTreeSet::new();
        for c in &self.claims {
            if !ids.insert(c.id.as_str()) {
                return Err(format!("claim id `{}` repeated", c.id));
            }
            if !layer_ok(&c.layer) {
                return Err(format!("claim `{}` names an unknown layer", c.id));
            }
            if Property::from_keyword(&c.property).is_none() {
                return Err(format!("claim `{}`: unknown property `{}`", c.id, c.property));
            }
            if Value::parse(&c.expected).is_none() {
                return Err(format!("claim `{}`: unknown expected value `{}`", c.id, c.expected));
            }
            if c.quote.trim().is_empty() {
                return Err(format!("claim `{}` has no quote", c.id));
            }
            dsl::parse_expr(&c.target).map_err(|e| format!("claim `{}`: {e}", c.id))?;
        }
        for i in &self.identities {
            if !ids.insert(i.id.as_str()) {
                return Err(format!("identity id `{}` repeated", i.id));
            }
            if !layer_ok(&i.layer) {
                return Err(format!("identity `{}` names an unknown layer", i.id));
            }
            if i.quote.trim().is_empty() {
                return Err(format!("identity `{}` has no quote", i.id));
            }
            dsl::parse_expr(&i.lhs).map_err(|e| format!("identity `{}`: {e}", i.id))?;
            dsl::parse_expr(&i.rhs).map_err(|e| format!("identity `{}`: {e}", i.id))?;
        }
        Ok(())
    }

    fn layer(&self, name: &Option<String>) -> usize {
        name.as_ref()
            .and_then(|n| self.layers.iter().position(|l| &l.name == n))
            .unwrap_or(0)
    }

    /// Drop an axiom declaration by label from every layer.
    pub fn remove_axiom(&mut self, label: &str) -> bool {
        let mut hit = false;
        for l in &mut self.layers {
            let before = l.axioms.len();
            l.axioms.retain(|a| a.label != label);
            hit |= l.axioms.len() != before;
        }
        hit
    }

    pub fn claim_mut(&mut self, id: &str) -> Option<&mut Claim> {
        self.claims.iter_mut().find(|c| c.id == id)
    }
}

/// The shipped corpus, in `S1..S7` order.
pub fn builtin() -> Vec<Scenario> {
    BUILTIN
        .iter()
        .map(|(f, src)| Scenario::from_toml(f, src).unwrap_or_else(|e| panic!("shipped scenario is broken: {e}")))
        .collect()
}

/// Raw text of the shipped files, for round-trip checks.
pub fn builtin_sources() -> &'static [(&'static str, &'static str)] {
    &BUILTIN
}

/// Every `*.toml` in `dir`, ordered by scenario id.
pub fn load_dir(dir: &Path) -> Result<Vec<Scenario>, ScenarioError> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "toml") {
            let src = std::fs::read_to_string(&path)?;
            out.push(Scenario::from_toml(&path.display().to_string(), &src)?);
        }
    }
    out.sort_by_key(|s| natural_key(&s.id));
    Ok(out)
}

fn natural_key(id: &str) -> (String, u64) {
    let digits: String = id.chars().filter(char::is_ascii_digit).collect();
    let stem: String = id.chars().filter(|c| !c.is_ascii_digit()).collect();
    (stem, digits.parse().unwrap_or(0))
}

pub fn find<'a>(all: &'a [Scenario], id: &str) -> Result<&'a Scenario, ScenarioError> {
    all.iter()
        .find(|s| s.id.eq_ignore_ascii_case(id))
        .ok_or_else(|| ScenarioError::UnknownId(id.to_string()))
}

#[derive(Clone, Debug, Serialize)]
pub struct ClaimReport {
    pub id: String,
    pub layer: String,
    pub target: String,
    pub property: Property,
    pub expected: Value,
    pub strategy: Strategy,
    pub gating: bool,
    pub quote: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normal_form: Option<String>,
    pub symbolic: Option<Verdict>,
    pub evidence: Vec<Evidence>,
    pub computed: Value,
    /// No numerical evidence disagrees with the symbolic verdict.
    pub agreement: bool,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub id: String,
    pub layer: String,
    pub lhs: String,
    pub rhs: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs_normal: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs_normal: Option<String>,
    pub holds: bool,
    pub quote: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioReport {
    pub id: String,
    pub title: String,
    pub anchor: String,
    pub notes: Vec<String>,
    pub axioms: Vec<String>,
    pub identities: Vec<IdentityReport>,
    pub claims: Vec<ClaimReport>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

impl ScenarioReport {
    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .identities
            .iter()
            .filter(|i| !i.holds)
            .map(|i| format!("identity {} does not hold", i.id))
            .collect();
        for c in &self.claims {
            if c.gating && !c.passed {
                out.push(format!(
                    "claim {}: expected {}, computed {}{}",
                    c.id,
                    c.expected,
                    c.computed,
                    c.detail.as_ref().map(|d| format!(" ({d})")).unwrap_or_default()
                ));
            } else if !c.agreement {
                out.push(format!("claim {}: numerical evidence contradicts the symbolic verdict", c.id));
            }
        }
        out.extend(self.errors.iter().cloned());
        out
    }
}

struct LayerState {
    name: String,
    session: Option<Session>,
    error: Option<String>,
}

fn build_layer(layer: &Layer) -> LayerState {
    let mut state = LayerState {
        name: layer.name.clone(),
        session: None,
        error: None,
    };
    let mut session = Session::new();
    let built = (|| -> Result<(), String> {
        let prog = dsl::parse(&layer.program).map_err(|e| e.to_string())?;
        for s in &prog.stmts {
            session.declare(s).map_err(|e| format!("{s}: {e}"))?;
        }
        for a in &layer.axioms {
            let src = format!("fact {}: {}", a.label, a.statement);
            let prog = dsl::parser::parse(&src).map_err(|e| format!("axiom {}: {e}", a.label))?;
            dsl::resolve(&prog, &session.names()).map_err(|e| format!("axiom {}: {e}", a.label))?;
            for s in &prog.stmts {
                session.declare(s).map_err(|e| format!("axiom {}: {e}", a.label))?;
            }
        }
        Ok(())
    })();
    match built {
        Ok(()) => state.session = Some(session),
        Err(e) => state.error = Some(format!("layer {}: {e}", layer.name)),
    }
    state
}

fn run_claim(c: &Claim, state: &mut LayerState, opts: &ExecOptions) -> ClaimReport {
    let property = Property::from_keyword(&c.property).unwrap_or(Property::Boundedness);
    let expected = Value::parse(&c.expected).unwrap_or(Value::Unknown);
    let mut r = ClaimReport {
        id: c.id.clone(),
        layer: state.name.clone(),
        target: c.target.clone(),
        property,
        expected,
        strategy: c.strategy,
        gating: c.gating,
        quote: c.quote.clone(),
        note: c.note.clone(),
        normal_form: None,
        symbolic: None,
        evidence: Vec::new(),
        computed: Value::Unknown,
        agreement: true,
        passed: false,
        detail: None,
    };
    let Some(session) = state.session.as_mut() else {
        r.detail = state.error.clone();
        return r;
    };
    let expr = match dsl::parse_expr(&c.target) {
        Ok(e) => e,
        Err(e) => {
            r.detail = Some(e.to_string());
            return r;
        }
    };
    let check = session.check(&expr, &[property], c.strategy.probe(), opts);
    r.normal_form = check.normal_form.clone();
    if let Some(err) = &check.error {
        r.detail = Some(err.clone());
    }
    let Some(verdict) = check.verdicts.into_iter().next() else {
        return r;
    };
    r.evidence = check.evidence;
    let suggestion = r.evidence.iter().find_map(|e| e.suggests(property));
    r.agreement = !r.evidence.iter().any(|e| e.contradicts(&verdict))
        && (verdict.value == Value::Unknown || suggestion.is_none_or(|s| s == verdict.value));
    r.computed = if verdict.value != Value::Unknown {
        verdict.value
    } else {
        suggestion.unwrap_or(Value::Unknown)
    };
    let mut ok = r.computed == expected && r.agreement;
    match c.strategy {
        Strategy::Symbolic => {}
        Strategy::Axiom => {
            if verdict.axioms().is_empty() {
                ok = false;
                r.detail.get_or_insert_with(|| "verdict cites no declared axiom".into());
            }
        }
        Strategy::Grid | Strategy::Gauss | Strategy::Triviality => {
            if suggestion.is_none() {
                ok = false;
                let why = r
                    .evidence
                    .first()
                    .map_or("no evidence".to_string(), Evidence::summary);
                r.detail.get_or_insert(format!("{} probe gave no conclusion: {why}", c.strategy));
            }
        }
    }
    if !r.agreement {
        r.detail.get_or_insert_with(|| "numerical evidence contradicts the symbolic verdict".into());
    }
    r.passed = ok;
    r.symbolic = Some(verdict);
    r
}

fn run_identity(i: &Identity, state: &mut LayerState) -> IdentityReport {
    let mut r = IdentityReport {
        id: i.id.clone(),
        layer: state.name.clone(),
        lhs: i.lhs.clone(),
        rhs: i.rhs.clone(),
        lhs_normal: None,
        rhs_normal: None,
        holds: false,
        quote: i.quote.clone(),
        note: i.note.clone(),
        error: None,
    };
    let Some(session) = state.session.as_mut() else {
        r.error = state.error.clone();
        return r;
    };
    let mut side = |src: &str| -> Result<crate::op::Op, String> {
        let e = dsl::parse_expr(src).map_err(|e| e.to_string())?;
        let op = session.eval_op(&e).map_err(|e| e.to_string())?;
        session
            .engine()
            .block_simplify(&op, &mut Trail::new())
            .map_err(|e| e.to_string())
    };
    match (side(&i.lhs), side(&i.rhs)) {
        (Ok(a), Ok(b)) => {
            r.lhs_normal = Some(a.to_string());
            r.rhs_normal = Some(b.to_string());
            r.holds = a == b;
        }
        (Err(e), _) | (_, Err(e)) => r.error = Some(e),
    }
    r
}

pub fn run_scenario(s: &Scenario, opts: &ExecOptions) -> ScenarioReport {
    let mut layers: Vec<LayerState> = s.layers.iter().map(build_layer).collect();
    let identities = s
        .identities
        .iter()
        .map(|i| run_identity(i, &mut layers[s.layer(&i.layer)]))
        .collect::<Vec<_>>();
    let claims = s
        .claims
        .iter()
        .map(|c| run_claim(c, &mut layers[s.layer(&c.layer)], opts))
        .collect::<Vec<_>>();
    let errors: Vec<String> = layers.iter().filter_map(|l| l.error.clone()).collect();
    let passed = errors.is_empty()
        && identities.iter().all(|i| i.holds)
        && claims.iter().all(|c| c.agreement && (c.passed || !c.gating));
    let axioms = s
        .layers
        .iter()
        .flat_map(|l| l.axioms.iter().map(move |a| format!("[{}] {}: {}", l.name, a.label, a.statement)))
        .collect();
    ScenarioReport {
        id: s.id.clone(),
        title: s.title.clone(),
        anchor: s.anchor.clone(),
        notes: s.notes.clone(),
        axioms,
        identities,
        claims,
        passed,
        errors,
    }
}

/// Run scenarios concurrently; reports come back in input order.
pub fn run_all(all: &[Scenario], opts: &ExecOptions) -> Vec<ScenarioReport> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = all.iter().map(|s| scope.spawn(move || run_scenario(s, opts))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|p| std::panic::resume_unwind(p)))
            .collect()
    })
}
