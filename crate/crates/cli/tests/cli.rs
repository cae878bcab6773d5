use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn hourscap(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hourscap"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("SOURCE_DATE_EPOCH", "0")
        .env_remove("HOURSCAP_THREADS")
        .output()
        .unwrap()
}

fn reference() -> String {
    configs().join("reference.json").to_string_lossy().into_owned()
}

fn names(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    v.sort();
    v
}

#[test]
fn missing_config_names_the_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let o = hourscap(&["pair"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("--config"), "{err}");
}

#[test]
fn help_and_version_succeed() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(hourscap(&["--help"], tmp.path()).status.code(), Some(0));
    assert_eq!(hourscap(&["--version"], tmp.path()).status.code(), Some(0));
    assert_eq!(hourscap(&["frobnicate"], tmp.path()).status.code(), Some(1));
}

#[test]
fn invalid_config_reports_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(reference()).unwrap()).unwrap();
    doc["economy"]["omega"] = serde_json::json!(1.5);
    let path = tmp.path().join("bad.json");
    std::fs::write(&path, doc.to_string()).unwrap();
    let o = hourscap(&["pair", "--config", path.to_str().unwrap()], &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("economy.omega"));
}

#[test]
fn infeasible_calibration_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(reference()).unwrap()).unwrap();
    doc["calibration"]["targets"]["informality_share"]["L"] = serde_json::json!(0.001);
    doc["calibration"]["targets"]["headline"] = serde_json::json!([]);
    let path = tmp.path().join("cal.json");
    std::fs::write(&path, doc.to_string()).unwrap();
    let o = hourscap(&["calibrate", "--config", path.to_str().unwrap()], &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn pair_writes_both_runs_metrics_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let o = hourscap(&["pair", "--config", &reference(), "--seed", "9"], tmp.path());
    assert!(o.status.success());
    assert_eq!(
        names(tmp.path()),
        ["baseline.csv", "baseline.json", "cap.csv", "cap.json", "config.json", "manifest.json", "metrics.json"]
    );
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "pair");
    assert_eq!(m["seed"], 9);
    assert_eq!(m["timestamp"], "1970-01-01T00:00:00Z");
    assert_eq!(m["outputs"].as_array().unwrap().len(), 6);
    let csv = std::fs::read_to_string(tmp.path().join("cap.csv")).unwrap();
    assert_eq!(csv.lines().count(), 25);
}

#[test]
fn format_flag_overrides_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let o = hourscap(&["simulate", "--config", &reference(), "--format", "csv"], tmp.path());
    assert!(o.status.success());
    assert_eq!(names(tmp.path()), ["config.json", "manifest.json", "scenario.csv"]);
}

#[test]
fn sweep_needs_a_sweep_section() {
    let tmp = tempfile::tempdir().unwrap();
    let o = hourscap(&["sweep", "--config", &reference()], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sweep"));
}

#[test]
fn sweep_writes_a_chart_when_asked() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("hours_curve.json");
    let o = hourscap(&["sweep", "--config", cfg.to_str().unwrap(), "--threads", "2"], tmp.path());
    assert!(o.status.success());
    let files = names(tmp.path());
    assert!(files.contains(&"hours_curve.svg".to_string()), "{files:?}");
    assert_eq!(std::fs::read_to_string(tmp.path().join("hours_curve.csv")).unwrap().lines().count(), 16);
}

#[test]
fn report_prints_a_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let o = hourscap(&["report", "--config", &reference()], tmp.path());
    assert!(o.status.success());
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.contains("required TFP gain") && table.contains("fatigue channel"), "{table}");
    let echoed = std::fs::read_to_string(tmp.path().join("config.json")).unwrap();
    let doc = hourscap_core::config::parse_config(&echoed).unwrap();
    assert_eq!(doc, hourscap_core::config::load_config(reference()).unwrap());
}
