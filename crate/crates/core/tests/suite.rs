use std::collections::BTreeSet;

use cexcheck::dsl::ExecOptions;
use cexcheck::numerics::GridSpec;
use cexcheck::report::SuiteReport;
use cexcheck::scenario::{self, ScenarioReport, Strategy};

fn run(all: &[scenario::Scenario]) -> Vec<ScenarioReport> {
    scenario::run_all(all, &ExecOptions::default())
}

#[test]
fn shipped_corpus_passes_in_order() {
    let reports = run(&scenario::builtin());
    let ids: Vec<&str> = reports.iter().map(|r| r.id.as_str()).collect();
    assert_eq!(ids, ["S1", "S2", "S3", "S4", "S5", "S6", "S7"]);
    for r in &reports {
        assert!(r.passed, "{}: {:?}", r.id, r.failures());
    }
}

#[test]
fn reports_are_deterministic() {
    let all = scenario::builtin();
    let opts = ExecOptions::default();
    let a = SuiteReport::new(&opts, scenario::run_all(&all, &opts)).to_json();
    let b = SuiteReport::new(&opts, scenario::run_all(&all, &opts)).to_json();
    assert_eq!(a, b);
    let a = SuiteReport::new(&opts, scenario::run_all(&all, &opts)).to_markdown();
    let b = SuiteReport::new(&opts, scenario::run_all(&all, &opts)).to_markdown();
    assert_eq!(a, b);
}

#[test]
fn symbolic_and_numerical_verdicts_never_disagree() {
    let mut both = 0;
    for r in run(&scenario::builtin()) {
        for c in &r.claims {
            let Some(v) = &c.symbolic else { continue };
            for e in &c.evidence {
                assert!(!e.contradicts(v), "{} {}: {} vs {}", r.id, c.id, v, e.summary());
                both += 1;
            }
        }
    }
    assert!(both >= 10, "only {both} claims carry both");
}

#[test]
fn one_corrupted_expectation_fails_one_scenario() {
    let mut all = scenario::builtin();
    let s2 = all.iter_mut().find(|s| s.id == "S2").unwrap();
    let c = s2.claim_mut("S2.c1").unwrap();
    c.expected = if c.expected == "affirmed" { "refuted" } else { "affirmed" }.to_string();
    let reports = run(&all);
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.id.as_str()).collect();
    assert_eq!(failed, ["S2"]);
    let s2 = reports.iter().find(|r| r.id == "S2").unwrap();
    let f = s2.failures();
    assert_eq!(f.len(), 1, "{f:?}");
    assert!(f[0].contains("S2.c1"), "{f:?}");
}

#[test]
fn one_scale_ladder_fails_s1() {
    let opts = ExecOptions {
        scales: vec![GridSpec::new(2.0, 128).unwrap()],
        ..ExecOptions::default()
    };
    let all = scenario::builtin();
    let s1 = scenario::run_scenario(scenario::find(&all, "S1").unwrap(), &opts);
    assert!(!s1.passed);
    let failing: Vec<_> = s1.claims.iter().filter(|c| c.gating && !c.passed).collect();
    assert!(!failing.is_empty());
    assert!(failing.iter().all(|c| c.strategy == Strategy::Grid), "{:?}", s1.failures());
}

fn assert_isolated(id: &str, label: &str) {
    let all = scenario::builtin();
    let base = scenario::find(&all, id).unwrap();
    let before = scenario::run_scenario(base, &ExecOptions::default());
    let mut cut = base.clone();
    assert!(cut.remove_axiom(label), "{id} has no axiom {label}");
    let after = scenario::run_scenario(&cut, &ExecOptions::default());

    let citing: BTreeSet<&str> = before
        .claims
        .iter()
        .filter(|c| c.symbolic.as_ref().is_some_and(|v| v.cites_axiom(label)))
        .map(|c| c.id.as_str())
        .collect();
    let flipped: BTreeSet<&str> = before
        .claims
        .iter()
        .zip(&after.claims)
        .filter(|(b, a)| b.computed != a.computed)
        .map(|(b, _)| b.id.as_str())
        .collect();
    assert!(!flipped.is_empty(), "{id}/{label}: nothing flipped");
    assert!(flipped.is_subset(&citing), "{id}/{label}: flipped {flipped:?}, citing {citing:?}");
    assert!(!after.passed);
}

#[test]
fn removing_an_axiom_flips_only_citing_claims() {
    assert_isolated("S4", "cd");
    assert_isolated("S4", "dc");
    assert_isolated("S5", "ab");
    assert_isolated("S7", "ab");
}

#[test]
fn scenario_dir_matches_builtin() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let loaded = scenario::load_dir(&dir).unwrap();
    let ids: Vec<String> = loaded.iter().map(|s| s.id.clone()).collect();
    let shipped: Vec<String> = scenario::builtin().iter().map(|s| s.id.clone()).collect();
    assert_eq!(ids, shipped);
    assert!(scenario::find(&loaded, "S9").is_err());
}
