use cexcheck::classify::{Property, Value};
use cexcheck::dsl::{self, ErrorKind, Evidence, ExecOptions, Session, Stmt};
use cexcheck::numerics::GridSpec;
use cexcheck::scenario;
use proptest::prelude::*;

const S2: &str = "B := block[[zero on full, mult(exp(x^2))],[zero on full, zero on full]]; check comm(abs(B), B) bounded closed";

fn small_opts() -> ExecOptions {
    ExecOptions {
        scales: GridSpec::ladder(&[1.0, 2.0], 16).unwrap(),
        schedule: vec![1.0, 0.75],
        ..ExecOptions::default()
    }
}

#[test]
fn parse_examples() {
    let p = dsl::parse(S2).unwrap();
    assert!(matches!(p.stmts[0], Stmt::Bind { ref name, .. } if name == "B"));
    let Stmt::Check { props, probe, .. } = &p.stmts[1] else { panic!() };
    assert_eq!(props.len(), 2);
    assert_eq!(*probe, None);

    assert_eq!(dsl::parse("check id bounded").unwrap().stmts.len(), 1);

    let e = dsl::parse("check comm(A,)").unwrap_err();
    assert_eq!(e.kind, ErrorKind::Syntax);
    assert_eq!(e.token, ")");
    assert_eq!((e.line, e.col), (1, 14));
}

#[test]
fn execute_examples() {
    let r = dsl::eval::run_source(S2, &ExecOptions::default()).unwrap();
    let c = &r.checks[0];
    assert!(r.errors.is_empty());
    // |B|B - B|B| = [[0, -A^2], [0, 0]]
    assert_eq!(c.normal_form.as_deref(), Some("block[[0, mult(-exp(2*x^2))], [0, 0]]"));
    assert_eq!(c.verdict(Property::Boundedness).unwrap().value, Value::Refuted);
    assert_eq!(c.verdict(Property::Closedness).unwrap().value, Value::Affirmed);

    let r = dsl::eval::run_source("check zero on full bounded closed", &ExecOptions::default()).unwrap();
    assert_eq!(r.checks[0].verdict(Property::Boundedness).unwrap().value, Value::Affirmed);
    assert_eq!(r.checks[0].verdict(Property::Closedness).unwrap().value, Value::Affirmed);

    let r = dsl::eval::run_source("check mult(exp(x^2))*mult(exp(x^2)) bounded --probe grid", &ExecOptions::default()).unwrap();
    let c = &r.checks[0];
    assert_eq!(c.verdict(Property::Boundedness).unwrap().value, Value::Refuted);
    assert!(matches!(c.evidence.as_slice(), [Evidence::Grid { .. }]));
    assert!(c.coherent());
}

#[test]
fn errors_from_execution_stay_in_the_report() {
    let r = dsl::eval::run_source("check mult(sqrt(x))", &ExecOptions::default()).unwrap();
    assert!(r.checks[0].error.is_some() || !r.errors.is_empty(), "{r:?}");
    let r = dsl::eval::run_source("check mult(full)", &ExecOptions::default()).unwrap();
    assert!(r.checks[0].error.is_some() || !r.errors.is_empty(), "{r:?}");
}

#[test]
fn every_scenario_round_trips() {
    for s in scenario::builtin() {
        for layer in &s.layers {
            let p = dsl::parse(&layer.program).unwrap();
            let again = dsl::parse(&dsl::render(&p)).unwrap();
            assert_eq!(p, again, "{} layer {}", s.id, layer.name);
        }
        let exprs = s
            .claims
            .iter()
            .map(|c| c.target.as_str())
            .chain(s.identities.iter().flat_map(|i| [i.lhs.as_str(), i.rhs.as_str()]));
        for src in exprs {
            let e = dsl::parse_expr(src).unwrap();
            assert_eq!(dsl::parse_expr(&e.to_string()).unwrap(), e, "{}: {src}", s.id);
        }
    }
}

/// 64-bit LCG; the fuzz corpus is fixed.
struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        self.0 >> 17
    }

    fn below(&mut self, n: usize) -> usize {
        (self.next() % n as u64) as usize
    }
}

const SOUP: &[&str] = &[
    "x", "1", "0.5", "2", "-", "+", "*", "/", "^", "(", ")", "[", "]", "{", "}", ",", ";", "\n", ":=", ":", " ", "id",
    "ft", "ift", "full", "trivial", "block", "zero", "on", "mult", "exp", "sqrt", "abs", "adj", "comm", "selfcomm",
    "fourier", "dom", "maxdom", "dsum", "meet", "pre", "axiom", "fact", "check", "bounded", "closed", "dense",
    "selfadjoint", "--probe", "grid", "trivial_intersection", "A", "B", "C", "(1/2)", "1e", "@", "é", "\u{0}",
];

fn assert_structured(src: &str) {
    match dsl::parse(src) {
        Ok(p) => {
            // whatever parses also renders back to the same program
            let again = dsl::parse(&dsl::render(&p)).unwrap_or_else(|e| panic!("{src:?}: render failed to parse: {e}"));
            assert_eq!(p, again, "{src:?}");
        }
        Err(e) => {
            assert!(e.line >= 1 && e.col >= 1, "{src:?}: {e:?}");
            assert!(!e.message.is_empty());
        }
    }
}

#[test]
fn fuzzed_inputs_give_structured_errors() {
    let mut rng = Lcg(0x5eed);
    for _ in 0..5_000 {
        let len = rng.below(48);
        let bytes: Vec<u8> = (0..len).map(|_| rng.next() as u8).collect();
        assert_structured(&String::from_utf8_lossy(&bytes));
    }
    let mut executed = 0;
    for _ in 0..5_000 {
        let len = 1 + rng.below(24);
        let src: String = (0..len).map(|_| SOUP[rng.below(SOUP.len())]).collect::<Vec<_>>().join(" ");
        assert_structured(&src);
        if dsl::parse(&src).is_ok() {
            let _ = dsl::eval::run_source(&src, &small_opts());
            executed += 1;
        }
    }
    assert!(executed > 0);
}

fn scalar_src() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        (0u8..8).prop_map(|k| format!("{}", k as f64 / 2.0)),
        (-4i8..=4).prop_map(|n| format!("exp({n}*x^2/4)")),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) + ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} - {b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a}*{b}")),
            inner.clone().prop_map(|a| format!("-({a})")),
            inner.clone().prop_map(|a| format!("abs({a})")),
            inner.clone().prop_map(|a| format!("sqrt(abs({a}))")),
            (inner.clone(), 1u8..4).prop_map(|(a, k)| format!("({a})^{k}")),
        ]
    })
}

fn op_src() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("id".to_string()),
        Just("ft".to_string()),
        Just("ift".to_string()),
        Just("A".to_string()),
        Just("zero on full".to_string()),
        scalar_src().prop_map(|s| format!("mult({s})")),
    ];
    leaf.prop_recursive(3, 16, 4, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} + {b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            inner.clone().prop_map(|a| format!("adj({a})")),
            inner.clone().prop_map(|a| format!("fourier({a})")),
            inner.clone().prop_map(|a| format!("abs({a})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("comm({a}, {b})")),
            inner.clone().prop_map(|a| format!("2*({a})")),
            inner.clone().prop_map(|a| format!("zero on dom({a})")),
            inner.clone().prop_map(|a| format!("{a} + zero on meet(dom({a}), maxdom(x^2))")),
            (inner.clone(), inner.clone(), inner.clone(), inner.clone())
                .prop_map(|(a, b, c, d)| format!("block[[{a}, {b}], [{c}, {d}]]")),
        ]
    })
}

fn eval_str(src: &str) -> Result<String, String> {
    let mut s = Session::new();
    for st in dsl::parse("A := mult(exp(x^2))").unwrap().stmts {
        s.declare(&st).unwrap();
    }
    let e = dsl::parse_expr(src).map_err(|e| e.to_string())?;
    s.eval(&e).map(|v| v.to_string()).map_err(|e| e.to_string())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn display_reparses_to_the_same_tree(src in op_src()) {
        let e = dsl::parse_expr(&src).unwrap();
        let shown = e.to_string();
        prop_assert_eq!(dsl::parse_expr(&shown).unwrap(), e, "{}", shown);
    }

    #[test]
    fn eval_is_invariant_under_display(src in op_src()) {
        let shown = dsl::parse_expr(&src).unwrap().to_string();
        prop_assert_eq!(eval_str(&src), eval_str(&shown));
    }

    #[test]
    fn programs_round_trip(a in op_src(), b in op_src(), probe in 0usize..4) {
        let probe = ["", " --probe none", " --probe grid", " --probe both"][probe];
        let src = format!("axiom C {{selfadjoint, unbounded}}\nA := mult(exp(x^2))\nT := {a}\nfact f: trivial_intersection(C, T)\ncheck comm(T, {b}) bounded closed{probe}");
        let p = dsl::parse(&src).unwrap();
        prop_assert_eq!(dsl::parse(&dsl::render(&p)).unwrap(), p);
    }
}
