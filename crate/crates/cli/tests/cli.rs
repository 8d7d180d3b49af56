use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dutyroster"))
}

fn run(args: &[&str], dir: &Path, stdin: Option<&[u8]>) -> Output {
    let mut child = bin()
        .args(args)
        .current_dir(dir)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut input = child.stdin.take().unwrap();
    input.write_all(stdin.unwrap_or_default()).unwrap();
    drop(input);
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// `oracle-check` fails with status 2 when no external solver is installed.
fn external_solver() -> bool {
    let dir = tempfile::tempdir().unwrap();
    run(&["oracle-check", "--n", "1"], dir.path(), None).status.code() == Some(0)
}

fn demo(dir: &Path, name: &str) -> Vec<u8> {
    let o = run(&["demo", "--scenario", name], dir, None);
    assert_eq!(o.status.code(), Some(0));
    o.stdout
}

#[test]
fn demo_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["internal-medicine", "cardiology", "orthopedics", "tiny-demo"] {
        assert_eq!(demo(dir.path(), name), demo(dir.path(), name), "{name}");
    }
    let o = run(&["demo", "--scenario", "nowhere"], dir.path(), None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["solve", "--bogus"], dir.path(), None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(run(&[], dir.path(), None).status.code(), Some(2));
    assert_eq!(run(&["validate", "-i", "missing.json", "-r", "missing.json"], dir.path(), None).status.code(), Some(2));
}

#[test]
fn solve_validate_and_report_the_demo() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let inst = demo(d, "tiny-demo");
    std::fs::write(d.join("demo.json"), &inst).unwrap();
    let o = run(&["solve", "--backend", "oracle", "--gap", "0", "--dump-derived", "derived.json"], d, Some(&inst));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("Unassigned duties"));
    for f in ["roster.json", "report.json", "derived.json"] {
        assert!(d.join(f).is_file(), "{f}");
    }

    let o = run(&["validate", "-i", "demo.json", "-r", "roster.json"], d, None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0 hard findings"));

    // hand-break the roster: ana takes both nights
    let mut roster: Value = serde_json::from_str(&std::fs::read_to_string(d.join("roster.json")).unwrap()).unwrap();
    for a in roster["payload"]["assignments"].as_array_mut().unwrap() {
        a["physician"] = "ana".into();
    }
    std::fs::write(d.join("broken.json"), roster.to_string()).unwrap();
    let o = run(&["validate", "-i", "demo.json", "-r", "broken.json"], d, None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("1 hard findings"), "{}", stdout(&o));

    let o = run(&["report", "-i", "demo.json", "-r", "roster.json", "--compare", "broken.json"], d, None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l.starts_with("Hard violations\t0\t1\t1")), "{}", stdout(&o));
    let o = run(&["report", "-i", "demo.json", "-r", "roster.json", "--format", "doc"], d, None);
    assert!(stdout(&o).contains("\"schema_version\""));
}

#[test]
fn export_mps_writes_model_and_names() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("demo.json"), demo(d, "tiny-demo")).unwrap();
    let o = run(&["export-mps", "-i", "demo.json", "-o", "demo.mps", "--listing", "demo.lst"], d, None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mps = std::fs::read_to_string(d.join("demo.mps")).unwrap();
    assert!(mps.starts_with("NAME"));
    assert!(mps.trim_end().ends_with("ENDATA"));
    assert!(std::fs::read_to_string(d.join("demo.names")).unwrap().contains("x[ana,N@2025-03-03]"));
    assert!(d.join("demo.lst").is_file());
}

#[test]
fn sequential_and_parallel_runs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let inst = demo(d, "tiny-demo");
    let a = run(&["solve", "--backend", "oracle", "--roster-out", "a.json", "--report-out", "ra.json"], d, Some(&inst));
    let b = run(&["--sequential", "solve", "--backend", "oracle", "--roster-out", "b.json", "--report-out", "rb.json"], d, Some(&inst));
    assert_eq!((a.status.code(), b.status.code()), (Some(0), Some(0)));
    let assignments = |f: &str| {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(d.join(f)).unwrap()).unwrap();
        v["payload"]["assignments"].clone()
    };
    assert_eq!(assignments("a.json"), assignments("b.json"));
}

#[test]
fn oracle_check_reports_full_agreement() {
    if !external_solver() {
        eprintln!("skipped: no external solver");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["oracle-check", "--n", "100", "--seed", "7"], dir.path(), None);
    assert_eq!(stdout(&o).lines().last(), Some("100/100 agree"), "{}", stdout(&o));
    assert_eq!(o.status.code(), Some(0));
    let again = run(&["oracle-check", "--n", "5", "--seed", "7", "--verbose"], dir.path(), None);
    assert_eq!(again.stdout, run(&["oracle-check", "--n", "5", "--seed", "7", "--verbose"], dir.path(), None).stdout);
}

#[test]
fn internal_medicine_solves_within_gap() {
    if !external_solver() {
        eprintln!("skipped: no external solver");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let inst = demo(d, "internal-medicine");
    let o = run(&["solve", "--gap", "0.03"], d, Some(&inst));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("OptimalWithinGap"), "{}", stdout(&o));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(d.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["payload"]["hard_findings"], 0);
}

#[test]
fn serve_without_tokens_refuses_to_start() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["serve", "--store", "s.db", "--listen", "127.0.0.1:0"])
        .env_remove("DUTYROSTER_TOKENS")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("DUTYROSTER_TOKENS"));
}
