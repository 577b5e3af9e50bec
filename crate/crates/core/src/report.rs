//! Suite reports: JSON records and markdown.

use std::fmt::Write;

use serde::Serialize;

use crate::dsl::ExecOptions;
use crate::gaussian;
use crate::numerics::{self, GridSpec};
use crate::scenario::{ClaimReport, ScenarioReport};

pub const FOURIER_CONVENTION: &str = "unitary, (Ff)(xi) = (2 pi)^(-1/2) int e^(-i xi x) f(x) dx";

#[derive(Clone, Debug, Serialize)]
pub struct Environment {
    pub fourier_convention: &'static str,
    pub scale_ladder: Vec<GridSpec>,
    pub gauss_schedule: Vec<f64>,
    pub gauss_schedule_origin: &'static str,
    pub growth_factor: f64,
    pub growth_steps: usize,
    pub stable_band: f64,
    pub blowup_factor: f64,
    pub blowup_min_entries: usize,
    pub triviality_factor: f64,
    pub triviality_cap: f64,
}

impl Environment {
    pub fn new(opts: &ExecOptions) -> Self {
        Environment {
            fourier_convention: FOURIER_CONVENTION,
            scale_ladder: opts.scales.clone(),
            gauss_schedule: opts.schedule.clone(),
            gauss_schedule_origin: if opts.schedule == gaussian::DEFAULT_SCHEDULE {
                "artifact choice: z = 1/2 + 10^(-2k), k = 0..4"
            } else {
                "user supplied"
            },
            growth_factor: numerics::GROWTH_FACTOR,
            growth_steps: numerics::GROWTH_STEPS,
            stable_band: opts.tolerance,
            blowup_factor: gaussian::BLOWUP_FACTOR,
            blowup_min_entries: gaussian::BLOWUP_MIN_ENTRIES,
            triviality_factor: numerics::TRIVIALITY_FACTOR,
            triviality_cap: numerics::TRIVIALITY_CAP,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub environment: Environment,
    pub scenarios: Vec<ScenarioReport>,
    pub passed: usize,
    pub total: usize,
}

impl SuiteReport {
    pub fn new(opts: &ExecOptions, scenarios: Vec<ScenarioReport>) -> Self {
        SuiteReport {
            environment: Environment::new(opts),
            passed: scenarios.iter().filter(|s| s.passed).count(),
            total: scenarios.len(),
            scenarios,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let e = &self.environment;
        let _ = writeln!(out, "# Counterexample suite: {}/{} scenarios pass\n", self.passed, self.total);
        let _ = writeln!(out, "- Fourier convention: {}", e.fourier_convention);
        let ladder: Vec<String> = e
            .scale_ladder
            .iter()
            .map(|g| format!("L={} n={}", g.half_width, g.n))
            .collect();
        let _ = writeln!(out, "- scale ladder: {}", ladder.join(", "));
        let _ = writeln!(out, "- Gaussian schedule ({}): {:?}", e.gauss_schedule_origin, e.gauss_schedule);
        let _ = writeln!(
            out,
            "- growing: factor >= {} over {} steps; stabilized: ratio within {:e} of 1",
            e.growth_factor, e.growth_steps, e.stable_band
        );
        let _ = writeln!(
            out,
            "- blowup: factor >= {} over >= {} entries; triviality: factor >= {} (cap {:e})\n",
            e.blowup_factor, e.blowup_min_entries, e.triviality_factor, e.triviality_cap
        );
        for s in &self.scenarios {
            scenario_markdown(&mut out, s);
        }
        out
    }
}

fn status(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn scenario_markdown(out: &mut String, s: &ScenarioReport) {
    let _ = writeln!(out, "## {} {}: {}\n", s.id, status(s.passed), s.title);
    let _ = writeln!(out, "> {}\n", s.anchor);
    for n in &s.notes {
        let _ = writeln!(out, "- note: {n}");
    }
    for a in &s.axioms {
        let _ = writeln!(out, "- axiom {a}");
    }
    if !s.notes.is_empty() || !s.axioms.is_empty() {
        out.push('\n');
    }
    if !s.identities.is_empty() {
        let _ = writeln!(out, "| identity | layer | holds | normal form |");
        let _ = writeln!(out, "|---|---|---|---|");
        for i in &s.identities {
            let nf = match (&i.lhs_normal, &i.error) {
                (Some(l), _) => l.clone(),
                (None, Some(e)) => format!("error: {e}"),
                (None, None) => String::new(),
            };
            let _ = writeln!(out, "| {} `{} = {}` | {} | {} | `{}` |", i.id, i.lhs, i.rhs, i.layer, status(i.holds), nf);
        }
        out.push('\n');
    }
    let _ = writeln!(out, "| claim | layer | target | property | expected | computed | strategy | result |");
    let _ = writeln!(out, "|---|---|---|---|---|---|---|---|");
    for c in &s.claims {
        let result = if c.gating { status(c.passed) } else if c.passed { "observed" } else { "observed, differs" };
        let _ = writeln!(
            out,
            "| {} | {} | `{}` | {} | {} | {} | {} | {} |",
            c.id,
            c.layer,
            c.target,
            c.property.keyword(),
            c.expected,
            c.computed,
            c.strategy,
            result
        );
    }
    out.push('\n');
    for c in &s.claims {
        claim_details(out, c);
    }
    for e in &s.errors {
        let _ = writeln!(out, "- error: {e}");
    }
    out.push('\n');
}

fn claim_details(out: &mut String, c: &ClaimReport) {
    let _ = writeln!(out, "- {} \"{}\"", c.id, c.quote);
    if let Some(nf) = &c.normal_form {
        let _ = writeln!(out, "  - normal form: `{nf}`");
    }
    if let Some(v) = &c.symbolic {
        let chain: Vec<String> = v
            .provenance
            .iter()
            .map(|s| match &s.axiom {
                Some(a) => format!("{}[{a}]", s.rule.name()),
                None => s.rule.name().to_string(),
            })
            .collect();
        let _ = writeln!(
            out,
            "  - symbolic: {}{}",
            v.words(),
            if chain.is_empty() { String::new() } else { format!(" via {}", chain.join(" > ")) }
        );
    }
    for e in &c.evidence {
        let _ = writeln!(out, "  - {}", e.summary());
    }
    if let Some(n) = &c.note {
        let _ = writeln!(out, "  - note: {n}");
    }
    if let Some(d) = &c.detail {
        let _ = writeln!(out, "  - detail: {d}");
    }
}
