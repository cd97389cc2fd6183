use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn acimsel(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acimsel")).arg("--out").arg(out).args(args).output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn density_of_the_lower_map() {
    let dir = tempfile::tempdir().unwrap();
    let o = acimsel(dir.path(), &["density", "ex2.1/tau1"]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("values [3/2, 1/2]"));
    let d = json(&dir.path().join("density-ex2.1_tau1/density.json"));
    assert_eq!(d["density"]["values"], serde_json::json!(["3/2", "1/2"]));
    assert_eq!(d["density"]["breakpoints"], serde_json::json!(["0", "1/2", "1"]));
}

#[test]
fn select_on_the_first_example() {
    let dir = tempfile::tempdir().unwrap();
    let o = acimsel(dir.path(), &["select", "ex2.1", "--lambda", "2/5", "--method", "main"]);
    assert!(o.status.success(), "{o:?}");
    let run = dir.path().join("select-ex2.1-main-2_5");
    let r = json(&run.join("report.json"));
    assert!(r["invariance"]["sup_error"].as_f64().unwrap() < 1e-8);
    assert!(run.join("eta.json").is_file() && run.join("graph.csv").is_file());
    let m = json(&run.join("manifest.json"));
    assert_eq!(m["status"]["ok"], Value::Bool(true));
    assert_eq!(m["inputs"]["lambda"]["exact"], Value::Bool(true));
}

#[test]
fn reproduce_fig3_has_four_series() {
    let dir = tempfile::tempdir().unwrap();
    let o = acimsel(dir.path(), &["reproduce", "fig3", "--resolution", "50"]);
    assert!(o.status.success(), "{o:?}");
    let csv = fs::read_to_string(dir.path().join("reproduce-fig3/fig3.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "x,tau1,tau2,eta,diagonal");
    assert_eq!(csv.lines().count(), 52);
}

#[test]
fn identical_runs_give_identical_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["random", "simulate", "--bgr", "2/5,3/5", "--n", "2000", "--seed", "11", "--histogram", "8"];
    assert!(acimsel(a.path(), &args).status.success());
    assert!(acimsel(b.path(), &args).status.success());
    for f in ["histogram.csv", "histogram.json", "report.json", "manifest.json"] {
        let p = Path::new("random-simulate-11").join(f);
        assert_eq!(fs::read(a.path().join(&p)).unwrap(), fs::read(b.path().join(&p)).unwrap(), "{f}");
    }
}

#[test]
fn manifest_replays_the_run() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(acimsel(a.path(), &["--format", "csv", "reproduce", "fig7", "--resolution", "40"]).status.success());
    let m = json(&a.path().join("reproduce-fig7/manifest.json"));
    let argv: Vec<String> = m["replay"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    assert_eq!(argv[0], "acimsel");
    let args: Vec<&str> = argv[1..].iter().map(String::as_str).collect();
    assert!(acimsel(b.path(), &args).status.success());
    for f in ["fig7.csv", "manifest.json"] {
        let p = Path::new("reproduce-fig7").join(f);
        assert_eq!(fs::read(a.path().join(&p)).unwrap(), fs::read(b.path().join(&p)).unwrap(), "{f}");
    }
    assert!(!a.path().join("reproduce-fig7/fig7.json").exists());
}

#[test]
fn output_directory_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_acimsel")).env("ACIMSEL_OUT", dir.path()).arg("claim-audit").output().unwrap();
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("31/24, 17/24"));
    assert!(dir.path().join("claim-audit/report.json").is_file());
}

#[test]
fn check_cex_prints_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = acimsel(dir.path(), &["check-cex", "--candidates", "10"]);
    assert!(o.status.success(), "{o:?}");
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["verdict"], "infeasible");
    assert_eq!(r["witness"]["equation"]["constant"], "11/5");
}

#[test]
fn verify_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = acimsel(dir.path(), &["verify", "ex2.1/remark", "uniform"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("sup_error 0e0"));
    let bad = acimsel(dir.path(), &["verify", "ex2.1/tau1", "uniform"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("report:"));
    assert_eq!(acimsel(dir.path(), &["select", "ex2.1", "--lambda", "3/2"]).status.code(), Some(1));
    assert_eq!(acimsel(dir.path(), &["density", "no/such/map"]).status.code(), Some(1));
    assert_eq!(acimsel(dir.path(), &["reproduce", "fig4"]).status.code(), Some(1));
    assert_eq!(acimsel(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(acimsel(dir.path(), &["select", "ex2.1", "--lambda", "1/2", "--resolution", "8"]).status.code(), Some(1));
}

#[test]
fn two_valued_search_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let o = acimsel(dir.path(), &["two-valued-search", "ex2.1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("Infeasible"));
    let o = acimsel(dir.path(), &["two-valued-search", "ex2.1", "--target", "f1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("Feasible"));
    assert!(dir.path().join("two-valued-ex2.1-f1/selection.json").is_file());
}

#[test]
fn map_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let tent = dir.path().join("tent.json");
    fs::write(
        &tent,
        r#"{"breakpoints": ["0", "1/2", "1"], "branches": [{"kind": "affine", "slope": "2", "intercept": "0"},
            {"kind": "affine", "slope": "-2", "intercept": "2"}]}"#,
    )
    .unwrap();
    let o = acimsel(dir.path(), &["verify", tent.to_str().unwrap(), "uniform"]);
    assert!(o.status.success(), "{o:?}");
}
