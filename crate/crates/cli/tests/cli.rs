use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use subpressure_cli::ExperimentConfig;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(format!("{name}.json"))
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subpressure"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn pressure_csv_rows_are_log_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture("full2_zero");
    let o = run(&["pressure", "--config", f.to_str().unwrap(), "--format", "csv"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("pressure.csv")).unwrap();
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let mut rows = 0;
    for r in rdr.records() {
        let r = r.unwrap();
        let v: f64 = r[2].parse().unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-12);
        rows += 1;
    }
    assert_eq!(rows, 6);
    assert!(text.contains("# config_sha256="));
    assert!(!dir.path().join("pressure.json").exists());
}

#[test]
fn varprinciple_finds_log_three() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture("bernoulli_log2");
    let o = run(&["varprinciple", "--config", f.to_str().unwrap(), "--format", "both"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("varprinciple.json")).unwrap()).unwrap();
    let obj = doc["result"]["objective"].as_f64().unwrap();
    assert!((obj - 3f64.ln()).abs() <= 1e-4);
    assert!(doc["result"]["gap"].as_f64().unwrap().abs() <= 1e-4);
    let trace = std::fs::read_to_string(dir.path().join("varprinciple.csv")).unwrap();
    assert!(trace.lines().any(|l| l == "iteration,objective,simplex_diameter"));
}

#[test]
fn verify_passes_on_s2() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture("s2_goldmean");
    let o = run(&["verify", "--config", f.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn zero_tolerance_exposes_rounding_as_a_violation() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture("full2_zero");
    let o = run(&["verify", "--config", f.to_str().unwrap(), "--tolerance", "0"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("violations:"));
}

#[test]
fn schema_errors_exit_two_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(
        dir.path(),
        "{\n  \"system\": {\"alphabet\": 2, \"transitions\": [[[1,1],[1,1]]]},\n  \"potential\": {\"kind\": \"constant\", \"c\": \"x\"}\n}\n",
    );
    let o = run(&["pressure", "--config", c.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("potential") && err.contains("line 3"), "{err}");
}

#[test]
fn inconsistent_dimensions_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(
        dir.path(),
        r#"{"system": {"alphabet": 2, "transitions": [[[1,1],[1,1]]]}, "potential": {"kind": "additive", "depth": 1, "table": [[0, 1, 2]]}}"#,
    );
    let o = run(&["pressure", "--config", c.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn budget_exceedance_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(
        dir.path(),
        r#"{"system": {"alphabet": 3, "transitions": [[[1,1,1],[1,1,1],[1,1,1]]]},
            "potential": {"kind": "matrix_cocycle", "matrices": [[[[1]], [[2]], [[3]]]]},
            "schedules": {"pressure": [40]}}"#,
    );
    let o = run(&["pressure", "--config", c.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn fixtures_round_trip() {
    for name in ["full2_zero", "bernoulli_log2", "s2_goldmean", "diag_cocycle", "zero_cocycle"] {
        let (cfg, _) = ExperimentConfig::load(&fixture(name)).unwrap();
        let again = ExperimentConfig::parse(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
        cfg.build().unwrap();
    }
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let f = fixture("diag_cocycle");
    let mut docs = Vec::new();
    for threads in ["1", "3"] {
        let dir = tempfile::tempdir().unwrap();
        let o = run(&["phistar", "--config", f.to_str().unwrap(), "--threads", threads, "--format", "both"], dir.path());
        assert_eq!(o.status.code(), Some(0));
        docs.push((
            std::fs::read(dir.path().join("phistar.json")).unwrap(),
            std::fs::read(dir.path().join("phistar.csv")).unwrap(),
        ));
    }
    assert_eq!(docs[0], docs[1]);
}
