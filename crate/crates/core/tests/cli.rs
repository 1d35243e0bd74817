use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const ERM: &str = r#"{"problem": {"mu": [0.3, 0.7], "loss": {"numerators": [[0, 1], [1, 0]], "denominator": 1}, "n": 3},
 "algorithm": {"kind": "erm"}}"#;

fn genbound(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("experiment.json");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_genbound"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--no-timestamp")
        .env_remove("GENBOUND_WORKERS")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn mi_reports_three_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let out = genbound(dir.path(), ERM, &["mi"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["schema_version"], "1");
    assert_eq!(doc["command"], "mi");
    assert!(doc.get("generated_at_unix").is_none());
    let names: Vec<_> = doc["reports"].as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["mi_gen", "lambda_mi_gen", "entropy_gen"]);
    assert_eq!(doc["reports"][0]["measured_value"].as_f64(), Some(0.1764));
}

#[test]
fn data_independent_algorithm_has_zero_bound() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"problem": {"mu": [0.2, 0.3, 0.5], "loss": {"numerators": [[0, 1, 2], [2, 1, 0]], "denominator": 2}, "n": 4},
        "algorithm": {"kind": "independent", "row": [0.25, 0.75]}}"#;
    let out = genbound(dir.path(), config, &["mi"]);
    assert_eq!(out.status.code(), Some(0));
    let report = &json(&out)["reports"][0];
    assert_eq!(report["inputs"]["mi"].as_f64(), Some(0.0));
    assert_eq!(report["bound_value"].as_f64(), Some(0.0));
    assert_eq!(report["measured_value"].as_f64(), Some(0.0));
    assert_eq!(report["satisfied"], true);
}

#[test]
fn power_law_example_is_point_four() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"analysis": {"bounds": ["noisy_erm_power_law"], "params": {"i_o": 1, "n": 1000}}}"#;
    let out = genbound(dir.path(), config, &["bound"]);
    assert_eq!(out.status.code(), Some(0));
    let report = &json(&out)["reports"][0];
    assert!((report["inputs"]["excess"].as_f64().unwrap() - 0.4).abs() < 1e-12);
}

#[test]
fn csv_output_has_fixed_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = genbound(dir.path(), ERM, &["mi", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("schema_version,command,generated_at_unix,seed,kind,label,name"));
    assert_eq!(header.split(',').count(), 23);
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn violated_bound_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let config = ERM.replace(r#""n": 3}"#, r#""n": 3, "sigma": 0.001}"#);
    let out = genbound(dir.path(), &config, &["mi"]);
    assert_eq!(out.status.code(), Some(4));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("bound violated: mi_gen measured 0.1764"), "{stderr}");
}

#[test]
fn capacity_overflow_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let config = ERM.replace(r#""n": 3"#, r#""n": 40"#);
    let out = genbound(dir.path(), &config, &["mi"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr).unwrap().contains("capacity"));
}

#[test]
fn malformed_json_exits_two_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let out = genbound(dir.path(), "{\"problem\": {\n \"mu\": [0.5 0.5]}}", &["mi"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("malformed JSON") && stderr.contains("line 2 column"), "{stderr}");
}

#[test]
fn semantic_error_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = ERM.replace("[0.3, 0.7]", "[0.3, 0.6]");
    let out = genbound(dir.path(), &config, &["mi"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("problem.mu"));
}

#[test]
fn unwritable_output_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("report.json");
    let out = genbound(dir.path(), ERM, &["mi", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.json");
    let out = genbound(dir.path(), ERM, &["mi", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&fs::read_to_string(target).unwrap()).unwrap();
    assert_eq!(doc["command"], "mi");
}

#[test]
fn invalid_worker_count_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("experiment.json");
    fs::write(&path, ERM).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_genbound"))
        .args(["mi", "--config"])
        .arg(&path)
        .env("GENBOUND_WORKERS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"problem": {"mu": [0.3, 0.7], "loss": {"numerators": [[0, 1], [1, 0], [1, 1]], "denominator": 1}, "n": 3},
        "algorithm": {"kind": "gibbs", "beta": 2.0}}"#;
    for args in [
        &["risk", "--seed", "5", "--trials", "5000"][..],
        &["monitor", "--seed", "5", "--trials", "2000"][..],
        &["risk", "--seed", "5", "--trials", "5000", "--format", "csv"][..],
    ] {
        let first = genbound(dir.path(), config, args);
        assert_eq!(first.status.code(), Some(0));
        let workers = |n: &str| {
            Command::new(env!("CARGO_BIN_EXE_genbound"))
                .args(args)
                .arg("--config")
                .arg(dir.path().join("experiment.json"))
                .arg("--no-timestamp")
                .env("GENBOUND_WORKERS", n)
                .output()
                .unwrap()
        };
        assert_eq!(workers("1").stdout, first.stdout);
        assert_eq!(workers("3").stdout, first.stdout);
    }
}

#[test]
fn timestamp_present_by_default() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("experiment.json");
    fs::write(&path, ERM).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_genbound")).args(["mi", "--config"]).arg(&path).output().unwrap();
    assert!(json(&out)["generated_at_unix"].as_u64().unwrap() > 1_600_000_000);
}
