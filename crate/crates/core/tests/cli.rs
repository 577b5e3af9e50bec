use std::process::{Command, Output};

fn cex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cexcheck")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_names_every_scenario() {
    let o = cex(&["list"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    for id in ["S1", "S2", "S3", "S4", "S5", "S6", "S7"] {
        assert!(out.lines().any(|l| l.starts_with(id)), "{out}");
    }
}

#[test]
fn verify_exit_codes() {
    let o = cex(&["verify", "S3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("S3 PASS"));
    assert_eq!(code(&cex(&["verify", "S9"])), 2);
    assert_eq!(code(&cex(&["verify"])), 2);
    assert_eq!(code(&cex(&["verify", "S1", "--scales", "2"])), 1);
    assert_eq!(code(&cex(&["verify", "S1", "--scales", "nope"])), 2);
}

#[test]
fn verify_json_is_structured() {
    let o = cex(&["verify", "S1", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], 1);
    assert_eq!(v["scenarios"][0]["id"], "S1");
    assert!(v["environment"]["fourier_convention"].as_str().unwrap().contains("unitary"));
}

#[test]
fn eval_exit_codes() {
    let ok = cex(&["eval", "-e", "mult(exp(x^2))*mult(exp(x^2))", "--probe", "grid", "--expect", "bounded=refuted"]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(stdout(&ok).contains("refuted") || stdout(&ok).contains("unbounded"));
    let mismatch = cex(&["eval", "-e", "check id bounded", "--expect", "bounded=refuted"]);
    assert_eq!(code(&mismatch), 1);
    let bad = cex(&["eval", "-e", "check comm(A,)"]);
    assert_eq!(code(&bad), 2);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("1:14"));
    assert_eq!(code(&cex(&["eval", "-e", "A := id", "--expect", "bounded=affirmed"])), 2);
    assert_eq!(code(&cex(&["eval", "-e", "id", "--expect", "bogus=affirmed"])), 2);
    assert_eq!(code(&cex(&["eval", "/nonexistent/file.cex"])), 2);
}

#[test]
fn eval_reads_files() {
    let dir = std::env::temp_dir().join(format!("cexcheck-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("s2.cex");
    std::fs::write(&f, "B := block[[0, mult(exp(x^2))], [0, 0]]\ncheck comm(abs(B), B) bounded closed\n").unwrap();
    let o = cex(&["eval", f.to_str().unwrap(), "--expect", "bounded=refuted", "--expect", "closed=affirmed"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn scenario_dir_override() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios");
    let o = cex(&["list", "--scenario-dir", dir]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 7);
    assert_eq!(code(&cex(&["list", "--scenario-dir", "/nonexistent"])), 2);
}
