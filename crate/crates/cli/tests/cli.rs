use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rvp(dir: &Path, config: &str, extra: &[&str]) -> Output {
    let path = dir.join("scenario.toml");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_rvp"))
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap()
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/report.json")).unwrap()).unwrap()
}

#[test]
fn constants_table_has_coinciding_brackets() {
    let dir = tempfile::tempdir().unwrap();
    let out = rvp(dir.path(), "scenario = \"constants\"\n[constants]\nbetas = [1.5, 2.0, 3.0]\n", &["--plot"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("out/constants.csv")).unwrap();
    let row: Vec<f64> = table.lines().nth(1).unwrap().split(',').filter_map(|x| x.parse().ok()).collect();
    assert_eq!(row[0], 1.5);
    assert!((row[1] - row[2]).abs() < 1e-12);
    assert_eq!(table.lines().count(), 4);
    let svg = fs::read_to_string(dir.path().join("out/constants.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(report(dir.path())["status"], "pass");
}

#[test]
fn invalid_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let out = rvp(dir.path(), "scenario = \"evolve\"\n[solver]\ncadence = 0.0\n", &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("solver.cadence"));
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = rvp(dir.path(), "scenario = \"evolve\"\n[initial]\nkapa = 1.0\n", &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kapa"));
}

#[test]
fn scenario_flag_overrides_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = rvp(dir.path(), "scenario = \"evolve\"\n", &["--scenario", "constants"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(dir.path())["scenario"], "constants");
}

const NEGATIVE: &str = "scenario = \"evolve\"
seed = 11
[initial]
kappa = 10.0
lambda = 0.2
n = 800
[solver]
cadence = 0.01
";

#[test]
fn negative_energy_evolution_reports_blowup() {
    let dir = tempfile::tempdir().unwrap();
    let out = rvp(dir.path(), NEGATIVE, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(dir.path());
    assert_eq!(r["verdict"], "blow-up");
    assert_eq!(r["triggers"][0]["trigger"], "support-growth");
    assert!(r["t_final"].as_f64().unwrap() < 1.0);
    assert_eq!(r["max_drifts"]["mass"], 0.0);
}

#[test]
fn same_seed_gives_identical_diagnostics() {
    let config = "scenario = \"evolve\"\n[initial]\nn = 400\n[solver]\nt_end = 1.0\n";
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(rvp(a.path(), config, &["--seed", "21"]).status.code(), Some(0));
    assert_eq!(rvp(b.path(), config, &["--seed", "21"]).status.code(), Some(0));
    let read = |d: &Path| fs::read(d.join("out/diagnostics.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    let c = tempfile::tempdir().unwrap();
    rvp(c.path(), config, &["--seed", "22"]);
    assert_ne!(read(a.path()), read(c.path()));
}

#[test]
fn runtime_failure_keeps_partial_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = rvp(dir.path(), "scenario = \"bounds-audit\"\n[initial]\nratio = 2.0\nn = 200\n", &[]);
    assert_eq!(out.status.code(), Some(4));
    assert!(dir.path().join("out/initial.json").exists());
    let r = report(dir.path());
    assert_eq!(r["status"], "error");
    assert!(r["error"].as_str().unwrap().contains("subcritical"));
}
