//! End-to-end runs of the `reslab` binary.

use std::path::Path;
use std::process::{Command, Output};

fn reslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reslab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_spec(dir: &Path, json: &str, extra: &[&str]) -> Output {
    let spec = dir.join("spec.json");
    std::fs::write(&spec, json).unwrap();
    let out = dir.join("out");
    let mut args = vec!["run", "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    reslab(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn resonances_of_unweighted_horseshoe() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_spec(
        dir.path(),
        r#"{"command":"resonances","params":{"weight":{"alpha":[]},"radius":40}}"#,
        &[],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let csv = std::fs::read_to_string(dir.path().join("out/resonances.csv")).unwrap();
    let rows: Vec<(f64, usize)> = csv
        .lines()
        .skip(2)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 2);
    assert!((rows[0].0 - 8.0).abs() < 1e-8 && rows[0].1 == 1);
    assert!((rows[1].0 - 32.0).abs() < 32e-8 && rows[1].1 == 4);
    assert!(dir.path().join("out/resonances.json").exists());
}

#[test]
fn entire_weight_trace_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_spec(
        dir.path(),
        r#"{"command":"trace-check","params":{"weight":{"generator":"rien"},"radius":100}}"#,
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("resonance set empty; local formula PASS"), "{}", stdout(&o));
}

#[test]
fn malformed_json_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_spec(dir.path(), r#"{"command": "zeta", "params": "#, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_field_is_a_schema_error_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_spec(
        dir.path(),
        r#"{"command":"det","params":{"weight":{"alpha":[]},"degree":4}}"#,
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("$.params") && err.contains("degree"), "{err}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn cone_sampling_requires_seed() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{"command":"gevrey","params":{"cone_distance":{"plus":{"centre":0,"half_angle":0.4},"minus":{"centre":1.5,"half_angle":0.4},"samples":2000}}}"#;
    let o = run_spec(dir.path(), spec, &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = run_spec(dir.path(), spec, &["--seed", "11"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("PASS gevrey.cone-distance"));
}

#[test]
fn identical_runs_give_identical_csv() {
    let spec = r#"{"command":"zeta","params":{"weight":{"alpha":[[0.3,-0.2],[0.1,0.4]]},"order":14}}"#;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run_spec(a.path(), spec, &[]).status.code(), Some(0));
    assert_eq!(run_spec(b.path(), spec, &[]).status.code(), Some(0));
    let read = |d: &Path| std::fs::read(d.join("out/zeta.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn tightened_tolerance_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_spec(
        dir.path(),
        r#"{"command":"zeta","params":{"weight":{"alpha":[[0.3,-0.2],[0.1,0.4]]}}}"#,
        &["--tol", "0"],
    );
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("FAIL zeta.orbit-route (tol 0e0)"));
}

#[test]
fn seventeen_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_spec(dir.path(), r#"{"command":"nuclear","params":{"theta":0.5,"beta":1.0,"order":6}}"#, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let csv = std::fs::read_to_string(dir.path().join("out/nuclear.csv")).unwrap();
    let third = csv.lines().nth(3).unwrap();
    let cell = third.split(',').nth(1).unwrap();
    assert_eq!(cell.split('e').next().unwrap().replace(['.', '-'], "").len(), 17, "{cell}");
    assert!((cell.parse::<f64>().unwrap() - 1.0 / 3.0).abs() < 1e-14);
}

#[test]
fn repro_selected_criteria() {
    let o = reslab(&["repro", "--criteria", "AC3,AC9"]);
    assert_eq!(o.status.code(), Some(0));
    let md = stdout(&o);
    assert!(md.contains("| AC3 | PASS |") && md.contains("| AC9 | PASS |"));
    assert!(!md.contains("| AC1 |"));
}

#[test]
fn repro_tampered_tolerance_names_the_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let o = reslab(&["repro", "--criteria", "AC4", "--tol=-1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL: AC4"));
    let md = std::fs::read_to_string(dir.path().join("repro.md")).unwrap();
    assert!(md.contains("| AC4 | FAIL |"));
}

#[test]
fn thread_cap_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_reslab"))
        .args(["repro", "--criteria", "AC3"])
        .env("RESLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_reslab"))
        .args(["repro", "--criteria", "AC1"])
        .env("RESLAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}
