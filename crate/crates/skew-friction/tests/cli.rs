//! End-to-end behavior of the binary: schemas, exit codes, config
//! precedence, determinism of file payloads.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_skew-friction"))
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn density_csv_schema_and_center_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("density.csv");
    let status = bin()
        .args(["density", "--grid", "-4:4:101", "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = read(&out);
    let comments: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
    assert!(comments.iter().any(|l| l.starts_with("# p = 0.5")));
    assert!(comments.iter().any(|l| l.starts_with("# normalization = ")));
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "x,density,cdf");
    assert_eq!(data.len(), 102);
    // x = 0 row carries the standard normal peak
    let center: Vec<&str> = data[51].split(',').collect();
    assert_eq!(center[0], "0");
    let v: f64 = center[1].parse().unwrap();
    assert!((v - 0.3989422804014327).abs() < 1e-7);
    // sidecar holds the timestamp; the payload must not
    assert!(dir.path().join("density.csv.meta.json").exists());
    assert!(!text.contains("written_at"));
}

#[test]
fn density_json_mirrors_csv_fields() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("density.json");
    let status = bin()
        .args(["density", "--grid", "-2:2:21", "--format", "json", "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&read(&out)).unwrap();
    assert_eq!(doc["metadata"]["p"], "0.5");
    assert_eq!(doc["grid"]["axes"][0]["name"], "x");
    assert_eq!(doc["grid"]["values"].as_array().unwrap().len(), 21);
    assert!(doc["metadata"]["normalization"].as_str().is_some());
}

#[test]
fn config_errors_exit_2() {
    for args in [
        vec!["density", "--p", "1.5"],
        vec!["density", "--T", "0"],
        vec!["occupation", "--grid", "0:1:11"],
        vec!["density", "--grid", "4:-4:10"],
        vec!["simulate", "--delta", "0.5", "--m", "3"],
        vec!["joint", "--which", "u_l", "--l", "-2"],
    ] {
        let output = bin().args(&args).output().unwrap();
        assert_eq!(output.status.code(), Some(2), "args {args:?}");
        assert!(!output.stderr.is_empty());
    }
    // unknown flag: clap's own usage error is also 2
    let output = bin().args(["density", "--bogus"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn config_file_and_env_var_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[model]\np = 0.7\n\n[output]\nformat = \"json\"\n").unwrap();
    let out = dir.path().join("out.json");
    // config picked up from the environment variable
    let status = bin()
        .args(["density", "--grid", "-1:1:5", "--out", out.to_str().unwrap()])
        .env("SKEW_FRICTION_CONFIG", cfg.to_str().unwrap())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&read(&out)).unwrap();
    assert_eq!(doc["metadata"]["p"], "0.7");
    // flag wins over the file
    let status = bin()
        .args(["density", "--grid", "-1:1:5", "--p", "0.2", "--out", out.to_str().unwrap()])
        .env("SKEW_FRICTION_CONFIG", cfg.to_str().unwrap())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&read(&out)).unwrap();
    assert_eq!(doc["metadata"]["p"], "0.2");
    assert_eq!(doc["metadata"]["config_source"], cfg.to_str().unwrap());
}

#[test]
fn simulate_deterministic_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &Path, seed: &str| {
        vec![
            "simulate".to_string(),
            "--paths".into(),
            "500".into(),
            "--delta".into(),
            "0.05".into(),
            "--seed".into(),
            seed.into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]
    };
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    assert_eq!(bin().args(args(&a, "5")).status().unwrap().code(), Some(0));
    assert_eq!(bin().args(args(&b, "5")).status().unwrap().code(), Some(0));
    assert_eq!(bin().args(args(&c, "6")).status().unwrap().code(), Some(0));
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn validate_json_lists_each_check_once_and_tol_zero_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let output = bin()
        .args([
            "validate",
            "--paths",
            "400",
            "--delta",
            "0.05",
            "--tol",
            "0",
            "--format",
            "json",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1), "zeroed thresholds must fail validation");
    let doc: serde_json::Value = serde_json::from_str(&read(&out)).unwrap();
    let checks = doc["report"]["checks"].as_array().unwrap();
    assert!(checks.len() >= 15);
    let mut names: Vec<&str> = checks.iter().map(|c| c["name"].as_str().unwrap()).collect();
    let total = names.len();
    names.sort();
    names.dedup();
    assert_eq!(names.len(), total, "duplicate check names");
    // every check with a nonzero observed deviation must fail against
    // zeroed thresholds (an exact-zero deviation still satisfies <= 0)
    for c in checks {
        if c["observed"].as_f64().unwrap() > 0.0 {
            assert_eq!(c["pass"], serde_json::Value::Bool(false), "check {}", c["name"]);
        }
    }
    assert!(checks.iter().any(|c| c["pass"] == serde_json::Value::Bool(false)));
    // the human-readable table names the failing checks on stderr
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("analytic.marginal_normalization"));
    assert!(stderr.contains("FAIL"));
}

#[test]
fn verbatim_pdf2_is_flagged_in_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("occ.csv");
    let status = bin()
        .args([
            "occupation",
            "--grid",
            "0.1:0.9:9",
            "--pdf2",
            "verbatim",
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = read(&out);
    assert!(text.contains("# pdf2 = verbatim"));
    let norm_line = text
        .lines()
        .find(|l| l.starts_with("# normalization = "))
        .unwrap();
    let norm: f64 = norm_line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!((norm - 2.0).abs() < 1e-3, "verbatim mass {norm}");
}

#[test]
fn joint_slice_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("joint.csv");
    let status = bin()
        .args([
            "joint",
            "--which",
            "x_l",
            "--grid",
            "-2:2:9,0:2:9",
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = read(&out);
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "x,l,density");
    assert_eq!(data.len(), 1 + 81);
    assert!(text.contains("# which = x_l"));
}

#[test]
fn table_local_time_normalizes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lt.csv");
    let status = bin()
        .args([
            "table",
            "--function",
            "local-time",
            "--m",
            "0.5",
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = read(&out);
    let norm_line = text
        .lines()
        .find(|l| l.starts_with("# normalization = "))
        .unwrap();
    let norm: f64 = norm_line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!((norm - 1.0).abs() < 1e-8);
}
