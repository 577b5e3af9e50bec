use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cexcheck::classify::{Property, Value};
use cexcheck::dsl::{self, ExecOptions, ProbeMode, ProgramReport};
use cexcheck::numerics::GridSpec;
use cexcheck::report::SuiteReport;
use cexcheck::scenario::{self, Scenario};

#[derive(Parser)]
#[command(name = "cexcheck", version, about = "Check commutator counterexamples for unbounded operators")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Numerical probe for checks that do not name one.
    #[arg(long, global = true, value_parser = parse_probe)]
    probe: Option<ProbeMode>,
    /// Scale ladder: comma separated `L` (n = 64L) or `L:n`.
    #[arg(long, global = true, value_parser = parse_scales)]
    scales: Option<Ladder>,
    /// Stabilization band of the grid probe.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Load scenarios from this directory instead of the built-in set.
    #[arg(long, global = true)]
    scenario_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Md)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Md,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// List scenarios.
    List,
    /// Run one scenario, or all of them.
    Verify {
        id: Option<String>,
        #[arg(long, conflicts_with = "id")]
        all: bool,
    },
    /// Run a DSL program from a file, or an expression or program given with -e.
    Eval {
        file: Option<PathBuf>,
        #[arg(short = 'e', long = "expr", conflicts_with = "file")]
        expr: Option<String>,
        /// `property=value` expected of the last check, e.g. `bounded=refuted`.
        #[arg(long, value_parser = parse_expect)]
        expect: Vec<(Property, Value)>,
    },
    /// Run all scenarios and print the report.
    Report,
}

fn parse_probe(s: &str) -> Result<ProbeMode, String> {
    ProbeMode::parse(s).ok_or_else(|| "expected none, grid, gauss or both".to_string())
}

#[derive(Clone)]
struct Ladder(Vec<GridSpec>);

fn parse_scales(s: &str) -> Result<Ladder, String> {
    s.split(',')
        .map(|item| {
            let item = item.trim();
            let (l, n) = match item.split_once(':') {
                Some((l, n)) => (l, Some(n)),
                None => (item, None),
            };
            let l: f64 = l.parse().map_err(|_| format!("bad half-width `{l}`"))?;
            let n = match n {
                Some(n) => n.parse().map_err(|_| format!("bad point count `{n}`"))?,
                None => (64.0 * l).round() as usize,
            };
            GridSpec::new(l, n).map_err(|e| e.to_string())
        })
        .collect::<Result<_, _>>()
        .map(Ladder)
}

fn parse_expect(s: &str) -> Result<(Property, Value), String> {
    let (p, v) = s.split_once('=').ok_or("expected property=value")?;
    let prop = Property::from_keyword(p.trim()).ok_or_else(|| format!("unknown property `{p}`"))?;
    let value = Value::parse(v.trim()).ok_or_else(|| format!("unknown value `{v}`"))?;
    Ok((prop, value))
}

/// Write to stdout; a closed pipe is not an error.
fn emit(s: &str) {
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn options(g: &Global) -> ExecOptions {
    let mut opts = ExecOptions::default();
    if let Some(p) = g.probe {
        opts.probe = p;
    }
    if let Some(s) = &g.scales {
        opts.scales = s.0.clone();
    }
    if let Some(t) = g.tolerance {
        opts.tolerance = t;
    }
    opts
}

fn scenarios(g: &Global) -> Result<Vec<Scenario>, String> {
    match &g.scenario_dir {
        Some(dir) => scenario::load_dir(dir).map_err(|e| e.to_string()),
        None => Ok(scenario::builtin()),
    }
}

fn suite(g: &Global, all: &[Scenario]) -> ExitCode {
    let opts = options(g);
    let report = SuiteReport::new(&opts, scenario::run_all(all, &opts));
    match g.format {
        Format::Md => emit(&report.to_markdown()),
        Format::Json => emit(&format!("{}\n", report.to_json())),
    }
    for s in &report.scenarios {
        for f in s.failures() {
            eprintln!("{}: {f}", s.id);
        }
    }
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

/// A bare expression is treated as `check <expr>`.
fn program_source(src: String) -> String {
    if dsl::parse_expr(&src).is_ok() {
        format!("check {src}")
    } else {
        src
    }
}

fn eval(g: &Global, src: &str, expect: &[(Property, Value)]) -> ExitCode {
    let report: ProgramReport = match dsl::eval::run_source(src, &options(g)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("parse error: {e}");
            return ExitCode::from(2);
        }
    };
    match g.format {
        Format::Md => emit(&report.to_markdown()),
        Format::Json => emit(&format!("{}\n", serde_json::to_string_pretty(&report).expect("report serializes"))),
    }
    let mut ok = report.errors.is_empty();
    for e in &report.errors {
        eprintln!("error: {e}");
    }
    for c in &report.checks {
        if let Some(e) = &c.error {
            eprintln!("line {}: {e}", c.line);
            ok = false;
        }
        if !c.coherent() {
            eprintln!("line {}: numerical evidence contradicts the symbolic verdict", c.line);
            ok = false;
        }
    }
    if !expect.is_empty() {
        let Some(last) = report.checks.last() else {
            eprintln!("--expect given but the program has no check");
            return ExitCode::from(2);
        };
        for (p, want) in expect {
            let got = last.verdict(*p).map(|v| v.value);
            if got != Some(*want) {
                let got = got.map_or("not computed", |v| v.name());
                eprintln!("expected {}={want}, got {got}", p.keyword());
                ok = false;
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    match cli.cmd {
        Cmd::List => {
            let all = match scenarios(g) {
                Ok(a) => a,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(2);
                }
            };
            for s in &all {
                emit(&format!("{}\t{}\t{} claims, {} identities\n", s.id, s.title, s.claims.len(), s.identities.len()));
            }
            ExitCode::SUCCESS
        }
        Cmd::Verify { id, all } => {
            let list = match scenarios(g) {
                Ok(a) => a,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(2);
                }
            };
            match (id, all) {
                (_, true) => suite(g, &list),
                (Some(id), false) => match scenario::find(&list, &id) {
                    Ok(s) => suite(g, std::slice::from_ref(s)),
                    Err(e) => {
                        eprintln!("{e}");
                        ExitCode::from(2)
                    }
                },
                (None, false) => {
                    eprintln!("verify needs a scenario id or --all");
                    ExitCode::from(2)
                }
            }
        }
        Cmd::Eval { file, expr, expect } => {
            let src = match (file, expr) {
                (Some(f), None) => match std::fs::read_to_string(&f) {
                    Ok(s) => s,
                    Err(e) => {
                        eprintln!("{}: {e}", f.display());
                        return ExitCode::from(2);
                    }
                },
                (None, Some(e)) => program_source(e),
                _ => {
                    eprintln!("eval needs a file or -e <expr>");
                    return ExitCode::from(2);
                }
            };
            eval(g, &src, &expect)
        }
        Cmd::Report => match scenarios(g) {
            Ok(all) => suite(g, &all),
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(2)
            }
        },
    }
}
