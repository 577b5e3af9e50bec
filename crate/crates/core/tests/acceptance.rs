//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use cexcheck::dsl::{self, Evidence, ExecOptions, Session};
use cexcheck::engine::{self, Trail};
use cexcheck::gaussian::{self, Gaussian, GaussianVec};
use cexcheck::numerics::{self, psd_sqrt, truncate, GridSpec, GrowthOutcome};
use cexcheck::op::Op;
use cexcheck::scalar::Scalar;
use cexcheck::scenario::{self, Scenario, ScenarioReport};
use num_complex::Complex64;
use num_rational::Rational64;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn op(program: &str, target: &str) -> Op {
    let mut s = Session::new();
    for st in dsl::parse(program).unwrap().stmts {
        s.declare(&st).unwrap();
    }
    let o = s.eval_op(&dsl::parse_expr(target).unwrap()).unwrap();
    s.engine().normalize(&o, &mut Trail::new()).unwrap()
}

fn suite() -> Vec<ScenarioReport> {
    scenario::run_all(&scenario::builtin(), &ExecOptions::default())
}

fn scenario_suite(reports: &[ScenarioReport]) -> Outcome {
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("{}: {:?}", r.id, r.failures()))
        .collect();
    if reports.len() == 7 && failed.is_empty() {
        Ok("7/7 scenarios pass".into())
    } else {
        Err(format!("{} scenarios, failing: {}", reports.len(), failed.join("; ")))
    }
}

fn structural_identities(reports: &[ScenarioReport]) -> Outcome {
    let wanted = [
        ("S1", "S1.i4", "block[[0, A^2], [0, 0]]"),
        ("S3", "S3.i4", "block[[0, -2*T^2], [2*T^2, 0]]"),
        ("S4", "S4.i8", "block[[0, C^2 - sqrt(C)], [sqrt(C) - C^2, 0]]"),
        ("S6", "S6.i2", "block[[-A^2, 0], [0, A^2]]"),
    ];
    let mut seen = Vec::new();
    for (sid, iid, rhs) in wanted {
        let r = reports.iter().find(|r| r.id == sid).ok_or(format!("{sid} missing"))?;
        let i = r.identities.iter().find(|i| i.id == iid).ok_or(format!("{iid} missing"))?;
        if i.rhs != rhs {
            return Err(format!("{iid}: right side is `{}`, not `{rhs}`", i.rhs));
        }
        if !i.holds {
            return Err(format!("{iid}: {} != {} ({:?} vs {:?})", i.lhs, i.rhs, i.lhs_normal, i.rhs_normal));
        }
        if i.quote.trim().is_empty() {
            return Err(format!("{iid}: no quote anchor"));
        }
        seen.push(format!("{iid} {}", i.lhs_normal.clone().unwrap_or_default()));
    }
    Ok(seen.join("; "))
}

fn grid_rows_ok(report: &numerics::GrowthReport) -> Result<(), String> {
    let ladder = GridSpec::default_ladder();
    let scales: Vec<(f64, usize)> = report.rows.iter().map(|r| (r.half_width, r.n)).collect();
    let want: Vec<(f64, usize)> = ladder.iter().map(|g| (g.half_width, g.n)).collect();
    if scales != want {
        return Err(format!("not the default ladder: {scales:?}"));
    }
    let ratios: Vec<f64> = report
        .rows
        .windows(2)
        .map(|w| {
            if w[0].log_norm == f64::NEG_INFINITY && w[1].log_norm == f64::NEG_INFINITY {
                1.0
            } else {
                (w[1].log_norm - w[0].log_norm).exp()
            }
        })
        .collect();
    match &report.outcome {
        GrowthOutcome::Growing { .. } => {
            let mut run = 0;
            let mut best = 0;
            for r in &ratios {
                run = if *r >= 1.5 { run + 1 } else { 0 };
                best = best.max(run);
            }
            if best >= 3 {
                Ok(())
            } else {
                Err(format!("growing with only {best} steps >= 1.5: {ratios:?}"))
            }
        }
        GrowthOutcome::StabilizedBounded { .. } => {
            if ratios[ratios.len() - 2..].iter().all(|r| (r - 1.0).abs() <= 1e-6) {
                Ok(())
            } else {
                Err(format!("stabilized but last ratios {ratios:?}"))
            }
        }
        GrowthOutcome::Inconclusive { reason } => Err(format!("inconclusive: {reason}")),
    }
}

fn coherence(reports: &[ScenarioReport]) -> Outcome {
    let mut checked = 0;
    for r in reports {
        for c in &r.claims {
            let Some(v) = &c.symbolic else { continue };
            for e in &c.evidence {
                let Evidence::Grid { report } = e else { continue };
                if e.suggests(v.property) != Some(v.value) {
                    return Err(format!("{}: symbolic {} vs {}", c.id, v, e.summary()));
                }
                grid_rows_ok(report).map_err(|m| format!("{}: {m}", c.id))?;
                checked += 1;
            }
        }
    }
    if checked == 0 {
        return Err("no claim carries both".into());
    }
    Ok(format!("{checked} claims with symbolic verdict and grid probe agree"))
}

fn trapezoid(lim: f64, f: impl Fn(f64) -> Complex64) -> Complex64 {
    let n = 24_000;
    let h = 2.0 * lim / n as f64;
    let mut s = (f(-lim) + f(lim)) * 0.5;
    for k in 1..n {
        s += f(-lim + k as f64 * h);
    }
    s * h
}

fn single(v: &GaussianVec) -> Result<Gaussian, String> {
    match v.leaves().as_slice() {
        [s] if s.terms.len() == 1 => Ok(s.terms[0]),
        _ => Err("output is not a single Gaussian".into()),
    }
}

fn gaussian_exactness() -> Outcome {
    let mut worst: f64 = 0.0;
    let mult = Op::Mult(Scalar::gaussian_exp(Rational64::new(1, 4)));
    for z in [0.6, 1.0, 2.0, 5.0] {
        let g = Gaussian::unit(z).map_err(|e| e.to_string())?;
        for (name, node, sign) in [("ft", Op::ft(), -1.0), ("ift", Op::ift(), 1.0)] {
            let out = single(&gaussian::apply(&node, &GaussianVec::leaf(g)).map_err(|e| e.to_string())?)?;
            let peak = out.eval(0.0).norm();
            for xi in [0.0, 0.5, 1.0, 2.0, 3.5] {
                let q = trapezoid(12.0, |x| Complex64::from_polar(1.0, sign * xi * x) * g.eval(x)) / (2.0 * PI).sqrt();
                let err = (q - out.eval(xi)).norm() / peak;
                worst = worst.max(err);
                if err >= 1e-10 {
                    return Err(format!("{name} at z={z}, xi={xi}: {err:e}"));
                }
            }
            let qn = trapezoid(12.0, |x| Complex64::new(out.eval(x).norm_sqr(), 0.0)).re.sqrt();
            let err = (qn - out.norm()).abs() / out.norm();
            worst = worst.max(err);
            if err >= 1e-10 {
                return Err(format!("{name} norm at z={z}: {err:e}"));
            }
        }
        let out = single(&gaussian::apply(&mult, &GaussianVec::leaf(g)).map_err(|e| e.to_string())?)?;
        let direct = |x: f64| Complex64::new((x * x * (0.25 - z / 2.0)).exp(), 0.0);
        for k in 0..25 {
            let x = -12.0 + k as f64;
            let err = (out.eval(x) - direct(x)).norm() / direct(x).norm();
            worst = worst.max(err);
            if err >= 1e-10 {
                return Err(format!("mult at z={z}, x={x}: {err:e}"));
            }
        }
        // output against the direct product, both integrated on [-12, 12]
        let qd = trapezoid(12.0, |x| Complex64::new(direct(x).norm_sqr(), 0.0)).re;
        let qo = trapezoid(12.0, |x| Complex64::new(out.eval(x).norm_sqr(), 0.0)).re;
        let err = (qd - qo).abs() / qo;
        worst = worst.max(err);
        if err >= 1e-10 {
            return Err(format!("mult norm at z={z}: {err:e}"));
        }
    }
    let g = Gaussian::unit(1.0).map_err(|e| e.to_string())?;
    let f = single(&gaussian::apply(&Op::ft(), &GaussianVec::leaf(g)).map_err(|e| e.to_string())?)?;
    let fixed = (f.amp - g.amp).norm().max((f.z - g.z).norm());
    if fixed > 1e-12 {
        return Err(format!("fixed point off by {fixed:e}"));
    }
    Ok(format!("worst relative error {worst:.1e}; fixed point off by {fixed:e}"))
}

fn s7_blowup() -> Outcome {
    let t = op("sA := mult(exp(x^2/4))\nsB := fourier(sA)", "sB*sA - sA*sB");
    let mut table = Vec::new();
    for z in gaussian::HALVING_SCHEDULE {
        table.push(gaussian::ratio(&t, z).map_err(|e| format!("z={z}: {e}"))?);
    }
    let shown: Vec<String> = gaussian::HALVING_SCHEDULE
        .iter()
        .zip(&table)
        .map(|(z, r)| format!("{z}: {r:.4}"))
        .collect();
    let increasing = table.windows(2).all(|w| w[1] > w[0]);
    let growth = table[table.len() - 1] / table[0];
    let msg = format!("ratios [{}], final/initial {growth:.3}", shown.join(", "));
    if increasing && growth >= 1e2 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn modulus_consistency() -> Outcome {
    let grid = GridSpec::new(3.0, 192).unwrap();
    let mut out = Vec::new();
    for (name, prog, target) in [
        ("S1 B", "A := mult(exp(x^2))", "block[[0, A], [0, 0]]"),
        ("S6 T", "A := mult(exp(x^2))", "block[[0, 0], [A, 0]]"),
    ] {
        let t = op(prog, target);
        let m = engine::modulus(&t).map_err(|e| e.to_string())?;
        let tm = truncate(&m, &grid).map_err(|e| e.to_string())?.to_dense();
        let tt = truncate(&t, &grid).map_err(|e| e.to_string())?.to_dense();
        let root = psd_sqrt(&(tt.adjoint() * &tt));
        let err = (&tm - &root).norm() / tm.norm();
        if err > 1e-8 {
            return Err(format!("{name}: {err:e}"));
        }
        out.push(format!("{name} {err:.1e}"));
    }
    Ok(out.join(", "))
}

fn triviality() -> Outcome {
    let a = Op::Mult(Scalar::gaussian_exp(Rational64::new(1, 2)));
    let b = Op::fourier(a.clone());
    let ladder = vec![GridSpec::new(4.0, 128).unwrap(), GridSpec::new(8.0, 256).unwrap()];
    let t = numerics::triviality_probe(&a, &b, &ladder).map_err(|e| e.to_string())?;
    let (m4, m8) = (t.rows[0].min_eigenvalue, t.rows[1].min_eigenvalue);
    let msg = format!("EVIDENCE minima L=4: {m4:.4}, L=8: {m8:.4}, factor {:.3}", m8 / m4);
    if m8 >= 10.0 * m4 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn negative_controls() -> Outcome {
    let opts = ExecOptions::default();
    let mut all = scenario::builtin();
    let c = all
        .iter_mut()
        .find(|s| s.id == "S2")
        .and_then(|s| s.claim_mut("S2.c1"))
        .ok_or("S2.c1 missing")?;
    c.expected = if c.expected == "affirmed" { "refuted" } else { "affirmed" }.into();
    let failed: Vec<String> = scenario::run_all(&all, &opts)
        .into_iter()
        .filter(|r| !r.passed)
        .map(|r| r.id)
        .collect();
    if failed != ["S2"] {
        return Err(format!("corrupted S2.c1 fails {failed:?}"));
    }
    let base: Scenario = scenario::find(&scenario::builtin(), "S4").map_err(|e| e.to_string())?.clone();
    let before = scenario::run_scenario(&base, &opts);
    let mut notes = vec!["corrupted S2.c1 fails only S2".to_string()];
    for label in ["cd", "dc"] {
        let mut cut = base.clone();
        if !cut.remove_axiom(label) {
            return Err(format!("S4 has no axiom {label}"));
        }
        let after = scenario::run_scenario(&cut, &opts);
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
        if flipped.is_empty() || !flipped.is_subset(&citing) {
            return Err(format!("removing {label}: flipped {flipped:?}, citing {citing:?}"));
        }
        notes.push(format!("removing S4 axiom {label} flips {flipped:?}"));
    }
    Ok(notes.join("; "))
}

struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        self.0 >> 17
    }
}

const SOUP: &[&str] = &[
    "x", "1", "0.5", "-", "+", "*", "/", "^", "(", ")", "[", "]", "{", "}", ",", ";", "\n", ":=", ":", "id", "ft",
    "full", "trivial", "block", "zero", "on", "mult", "exp", "sqrt", "abs", "adj", "comm", "selfcomm", "fourier", "dom",
    "meet", "dsum", "axiom", "fact", "check", "bounded", "closed", "--probe", "none", "A", "B", "@", "\u{0}",
];

fn parser_robustness() -> Outcome {
    let mut rng = Lcg(0xacce55);
    let mut parsed = 0;
    for i in 0..10_000 {
        let src = if i % 2 == 0 {
            let bytes: Vec<u8> = (0..rng.next() % 64).map(|_| rng.next() as u8).collect();
            String::from_utf8_lossy(&bytes).into_owned()
        } else {
            let n = 1 + rng.next() % 24;
            (0..n).map(|_| SOUP[(rng.next() % SOUP.len() as u64) as usize]).collect::<Vec<_>>().join(" ")
        };
        let res = std::panic::catch_unwind(|| dsl::parse(&src));
        match res {
            Err(_) => return Err(format!("parser panicked on {src:?}")),
            Ok(Err(e)) if e.line == 0 || e.col == 0 || e.message.is_empty() => {
                return Err(format!("unstructured error on {src:?}: {e:?}"))
            }
            Ok(Err(_)) => {}
            Ok(Ok(_)) => parsed += 1,
        }
    }
    let mut files = 0;
    for (name, src) in scenario::builtin_sources() {
        let s = Scenario::from_toml(name, src).map_err(|e| e.to_string())?;
        for layer in &s.layers {
            let p = dsl::parse(&layer.program).map_err(|e| format!("{name}: {e}"))?;
            let again = dsl::parse(&dsl::render(&p)).map_err(|e| format!("{name} render: {e}"))?;
            if again != p {
                return Err(format!("{name} layer {} does not round-trip", layer.name));
            }
        }
        let targets = s
            .claims
            .iter()
            .map(|c| &c.target)
            .chain(s.identities.iter().flat_map(|i| [&i.lhs, &i.rhs]));
        for t in targets {
            let e = dsl::parse_expr(t).map_err(|e| format!("{name}: {e}"))?;
            if dsl::parse_expr(&e.to_string()).ok() != Some(e) {
                return Err(format!("{name}: `{t}` does not round-trip"));
            }
        }
        files += 1;
    }
    Ok(format!("10000 fuzzed inputs ({parsed} parse), {files} scenario files round-trip"))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let reports = suite();
    let criteria: [Criterion; 9] = [
        ("scenario suite", Box::new(|| scenario_suite(&reports))),
        ("structural identities", Box::new(|| structural_identities(&reports))),
        ("numerical/symbolic coherence", Box::new(|| coherence(&reports))),
        ("gaussian oracle exactness", Box::new(gaussian_exactness)),
        ("S7 blowup on the halving schedule", Box::new(s7_blowup)),
        ("modulus consistency", Box::new(modulus_consistency)),
        ("triviality probe growth", Box::new(triviality)),
        ("negative controls", Box::new(negative_controls)),
        ("parser robustness", Box::new(parser_robustness)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of 9 criteria pass ({:.1}s)", 9 - failed, start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
