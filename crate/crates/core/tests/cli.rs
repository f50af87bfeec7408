use std::path::PathBuf;
use std::process::{Command, Output};

fn logind(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logind")).args(args).output().unwrap()
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_writes_trace_and_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.csv");
    let cert = dir.path().join("cert.csv");
    let o = logind(&[
        "run",
        &fixture("tiny.toml"),
        "--out",
        out.to_str().unwrap(),
        "--certificates",
        cert.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = std::fs::read_to_string(&out).unwrap();
    assert!(trace.starts_with("day,sentence,price_num,price_den\n"));
    let certs = std::fs::read_to_string(&cert).unwrap();
    assert!(certs.starts_with("day,epsilon,max_value,scale_theorem_buyer_1,scale_complement_2\n"));
    assert_eq!(certs.lines().count(), 13);

    let o = logind(&[
        "check",
        out.to_str().unwrap(),
        "--certificates",
        cert.to_str().unwrap(),
        "--scenario",
        &fixture("tiny.toml"),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("12 replayed, 0 issues: pass"));
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        assert!(logind(&["run", &fixture("tiny.toml"), "--out", out.to_str().unwrap()])
            .status
            .success());
        let mut cert = out.clone().into_os_string();
        cert.push(".cert.csv");
        (std::fs::read(&out).unwrap(), std::fs::read(cert).unwrap())
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn check_flags_tampered_prices() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.csv");
    assert!(logind(&["run", &fixture("tiny.toml"), "--out", out.to_str().unwrap()])
        .status
        .success());
    let text = std::fs::read_to_string(&out).unwrap().replacen(",1,2\n", ",3,2\n", 1);
    std::fs::write(&out, text).unwrap();
    let o = logind(&["check", out.to_str().unwrap(), "--resolution", "1/64"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("outside [0, 1]"));
}

#[test]
fn exploit_eval_reports_each_trader() {
    let o = logind(&[
        "exploit-eval",
        &fixture("constant_half.csv"),
        &fixture("traders"),
        "--horizon",
        "20",
        "--scenario",
        &fixture("phi_day10.toml"),
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("# trader: buyer\n"));
    assert!(text.contains("# running_min: -9/2 (day 9)\n"));
    assert!(text.contains("# running_max: 10/1\n"));
    assert!(text.contains("# trader: idle\n"));
    assert!(text.contains("20,10/1,10/1\n"));
}

#[test]
fn experiment_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.txt");
    let o = logind(&[
        "experiment",
        "paradox",
        "--p",
        "1/2",
        "--horizon",
        "60",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("# verdict: pass"));
    assert!(text.contains("# window: 30..=60"));

    let o = logind(&["experiment", "paradox", "--p", "1/2", "--horizon", "60", "--control"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("# control: true"));

    let o = logind(&["experiment", "coherence", "--scenario", &fixture("tiny.toml")]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn configuration_errors_exit_2() {
    assert_eq!(logind(&["experiment", "no_such_thing"]).status.code(), Some(2));
    assert_eq!(
        logind(&["run", "/nonexistent.toml", "--out", "/tmp/x.csv"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(logind(&["experiment", "paradox", "--p", "abc"]).status.code(), Some(2));
    assert_eq!(logind(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "horizon = 5\n[market]\nresolution = \"2/3\"\n").unwrap();
    assert_eq!(
        logind(&["run", bad.to_str().unwrap(), "--out", "/tmp/x.csv"])
            .status
            .code(),
        Some(2)
    );
}
