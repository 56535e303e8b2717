use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const CLASSICAL: &str = r#"{"bounds": {"sigma_lo": 1, "sigma_hi": 1}, "horizon": 1, "seed": 5,
  "grid_sizes": [1024], "chaos_orders": [2], "paths_per_scenario": 500}"#;

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_gchaos"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(args)
        .output()
        .unwrap()
}

fn report(dir: &Path, command: &str) -> Value {
    let text = fs::read_to_string(dir.join("out").join(format!("{command}_report.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn check<'a>(rep: &'a Value, name: &str) -> &'a Value {
    rep["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn config_errors_exit_two() {
    let cases = [
        (r#"{"bounds": {"sigma_lo": 1, "sigma_hi": 1}, "horizon": 1, "seed": 1, "colour": 2}"#, "colour"),
        (r#"{"bounds": {"sigma_lo": 2, "sigma_hi": 0.5}, "horizon": 1, "seed": 1}"#, "bounds"),
        (r#"{"bounds": {"sigma_lo": 1, "sigma_hi": 1}, "horizon": 1}"#, "seed"),
        (r#"{"bounds": {"sigma_lo": 1, "sigma_hi": 1}, "horizon": 1, "seed": 1, "grid_sizes": [100]}"#, "grid_sizes"),
        (r#"{"bounds": {"sigma_lo": 1, "sigma_hi": 1}, "horizon": 1, "seed": 1, "formats": ["xml"]}"#, "formats"),
        (r#"{"bounds": {"sigma_lo": 1, "sigma_hi": 1}, "horizon": 1, "seed": 1, "f": "affine(1)"}"#, "f"),
        ("not json", "<root>"),
    ];
    for (doc, needle) in cases {
        let dir = tempfile::tempdir().unwrap();
        let out = run(dir.path(), doc, &["verify"]);
        assert_eq!(out.status.code(), Some(2), "{doc}");
        assert!(stderr(&out).contains(needle), "{doc}: {}", stderr(&out));
        assert!(!dir.path().join("out").exists());
    }
}

#[test]
fn missing_config_is_a_config_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_gchaos")).arg("verify").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn classical_second_order_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), CLASSICAL, &["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let rep = report(dir.path(), "verify");
    assert_eq!(rep["report_version"], 1);
    assert_eq!(rep["failed_checks"], 0);
    let c = check(&rep, "theorem.n=2.rel_rms[N=1024]");
    assert!(c["value"].as_f64().unwrap() <= 1e-12);
    let table = fs::read_to_string(dir.path().join("out/verify_theorem.csv")).unwrap();
    assert!(table.starts_with("n,N,paths,rms_error,rel_rms,order\n"));
}

#[test]
fn degree_overflow_is_a_named_failure() {
    let dir = tempfile::tempdir().unwrap();
    let doc = CLASSICAL.replace(r#""chaos_orders": [2]"#, r#""chaos_orders": [2, 31]"#);
    let out = run(dir.path(), &doc, &["verify"]);
    assert_eq!(out.status.code(), Some(1));
    let rep = report(dir.path(), "verify");
    let c = check(&rep, "theorem.n=31");
    assert_eq!(c["passed"], false);
    assert!(c["detail"].as_str().unwrap().contains("31"), "{c}");
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL theorem.n=31"));
}

#[test]
fn mixed_bounds_cross_check() {
    let dir = tempfile::tempdir().unwrap();
    let doc = r#"{"bounds": {"sigma_lo": 0.5, "sigma_hi": 2}, "horizon": 1, "seed": 9,
      "grid_sizes": [64], "chaos_orders": [2], "paths_per_scenario": 4000,
      "payoffs": [{"kind": "square"}], "moment_checks": false}"#;
    let out = run(dir.path(), doc, &["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let rep = report(dir.path(), "verify");
    assert_eq!(check(&rep, "cross_check[x^2]")["passed"], true);
}

#[test]
fn expectation_requires_endpoint_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let doc = r#"{"bounds": {"sigma_lo": 0.5, "sigma_hi": 2}, "horizon": 1, "seed": 9,
      "scenarios": [{"kind": "constant", "sigma": 1}]}"#;
    let out = run(dir.path(), doc, &["expectation"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("scenarios"));
}

#[test]
fn convergence_needs_three_grids() {
    let dir = tempfile::tempdir().unwrap();
    let doc = CLASSICAL.replace("[1024]", "[256, 1024]");
    let out = run(dir.path(), &doc, &["convergence"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("grid_sizes"));
}

fn convergence_rows(dir: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(dir.join("out/convergence_convergence.csv")).unwrap();
    let headers: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(headers, ["n", "N", "rms_error", "rel_rms", "order"]);
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn convergence_exact_and_affine_orders() {
    let dir = tempfile::tempdir().unwrap();
    let doc = r#"{"bounds": {"sigma_lo": 0.5, "sigma_hi": 2}, "horizon": 1, "seed": 21,
      "grid_sizes": [256, 1024, 4096], "f": "affine(1, 0.5)", "chaos_orders": [2, 3],
      "scenarios": [{"kind": "bang_bang", "switch_prob": 0.05}], "paths_per_scenario": 300}"#;
    let out = run(dir.path(), doc, &["convergence"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let rows = convergence_rows(dir.path());
    assert_eq!(rows.len(), 6);
    for row in &rows[..3] {
        assert!(row[3].parse::<f64>().unwrap() <= 1e-12);
    }
    assert_eq!(rows[1][4], "exact");
    assert_eq!(rows[2][4], "exact");
    for row in &rows[4..] {
        assert!(row[4].parse::<f64>().unwrap() >= 0.4, "{row:?}");
    }
}

#[test]
fn zero_volatility_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let doc = r#"{"bounds": {"sigma_lo": 0, "sigma_hi": 1}, "horizon": 1, "seed": 2,
      "grid_sizes": [16, 32, 64], "chaos_orders": [1, 2, 3, 4],
      "scenarios": [{"kind": "constant", "sigma": 0}], "paths_per_scenario": 20}"#;
    let out = run(dir.path(), doc, &["convergence"]);
    assert_eq!(out.status.code(), Some(0));
    for row in convergence_rows(dir.path()) {
        assert_eq!(row[2].parse::<f64>().unwrap(), 0.0);
        assert!(row[4].is_empty() || row[4] == "exact");
    }
}

#[test]
fn identical_configs_give_identical_reports() {
    let doc = r#"{"bounds": {"sigma_lo": 0.5, "sigma_hi": 2}, "horizon": 1, "seed": 77,
      "grid_sizes": [64, 128], "chaos_orders": [2, 3], "paths_per_scenario": 200,
      "scenarios": [{"kind": "sweep", "points": 3, "bang_bang": [0.2]}], "export_paths": 1}"#;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(a.path(), doc, &["verify"]);
    run(b.path(), doc, &["verify"]);
    let mut names: Vec<_> = fs::read_dir(a.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.iter().any(|n| n == "verify_report.meta.json"));
    for name in names {
        let pa = a.path().join("out").join(&name);
        if name.to_string_lossy().ends_with(".meta.json") || pa.is_dir() {
            continue;
        }
        let pb = b.path().join("out").join(&name);
        assert_eq!(fs::read(&pa).unwrap(), fs::read(&pb).unwrap(), "{name:?}");
    }
    assert_eq!(
        fs::read(a.path().join("out/paths/path_0.csv")).unwrap(),
        fs::read(b.path().join("out/paths/path_0.csv")).unwrap()
    );
    let seeded = tempfile::tempdir().unwrap();
    run(seeded.path(), doc, &["verify", "--seed", "78"]);
    assert_ne!(report(a.path(), "verify")["tables"], report(seeded.path(), "verify")["tables"]);
}

#[test]
fn exit_status_matches_failed_checks() {
    let strict = r#"{"bounds": {"sigma_lo": 0.5, "sigma_hi": 2}, "horizon": 1, "seed": 3,
      "grid_sizes": [64], "chaos_orders": [3], "paths_per_scenario": 50,
      "thresholds": {"theorem_rel_rms": 1e-9}}"#;
    for (doc, expected) in [(CLASSICAL, 0), (strict, 1)] {
        let dir = tempfile::tempdir().unwrap();
        let out = run(dir.path(), doc, &["verify"]);
        let rep = report(dir.path(), "verify");
        let failed = rep["checks"].as_array().unwrap().iter().filter(|c| c["passed"] == false).count();
        assert_eq!(rep["failed_checks"].as_u64().unwrap() as usize, failed);
        assert_eq!(out.status.code(), Some(expected));
        assert_eq!(failed == 0, expected == 0);
    }
}

#[test]
fn path_export_columns() {
    let dir = tempfile::tempdir().unwrap();
    let doc = CLASSICAL.replace(r#""paths_per_scenario": 500"#, r#""paths_per_scenario": 10, "export_paths": 1, "moment_checks": false, "payoffs": []"#);
    run(dir.path(), &doc, &["verify"]);
    let mut r = csv::Reader::from_path(dir.path().join("out/paths/path_0.csv")).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["t", "B", "qv_realized", "sigma"]);
    let rows: Vec<_> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1025);
    let b = &rows[10][1];
    let digits = b.split('e').next().unwrap().chars().filter(char::is_ascii_digit).count();
    assert!(digits >= 15, "{b}");
    assert_eq!(&rows[1024][0], "1.0000000000000000e0");
}

#[test]
fn expectation_report_fields() {
    let dir = tempfile::tempdir().unwrap();
    let doc = r#"{"bounds": {"sigma_lo": 0.5, "sigma_hi": 2}, "horizon": 1, "seed": 4,
      "grid_sizes": [16], "paths_per_scenario": 2000,
      "scenarios": [{"kind": "sweep", "points": 5}], "payoffs": [{"kind": "square"}, {"kind": "abs"}]}"#;
    let out = run(dir.path(), doc, &["expectation"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = report(dir.path(), "expectation");
    let est = &rep["results"]["estimates"][0];
    for key in ["functional", "bounds", "grid", "rows", "upper", "lower", "argmax", "seed"] {
        assert!(!est[key].is_null(), "{key}");
    }
    assert_eq!(est["rows"].as_array().unwrap().len(), 5);
    assert_eq!(est["argmax"], 4);
    assert_eq!(est["argmin"], 0);
}

#[test]
fn gheat_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let doc = r#"{"bounds": {"sigma_lo": 0.5, "sigma_hi": 2}, "horizon": 1, "seed": 4,
      "payoffs": [{"kind": "square"}], "pde_space_steps": 200}"#;
    let out = run(dir.path(), doc, &["gheat"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = report(dir.path(), "gheat");
    let u = rep["results"]["values"][0]["value_at_zero"].as_f64().unwrap();
    assert!((u - 4.0).abs() < 0.04);
    let mut r = csv::Reader::from_path(dir.path().join("out/gheat_profile_0.csv")).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["x", "u"]);
    assert_eq!(r.records().count(), 201);
}

#[test]
fn hermite_table_without_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_gchaos"))
        .args(["hermite-table", "--max-degree", "4", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let table = fs::read_to_string(dir.path().join("hermite-table_coefficients.csv")).unwrap();
    assert!(table.contains("4,0,3\n") && table.contains("4,2,-6\n") && table.contains("4,4,1\n"), "{table}");
    let out = Command::new(env!("CARGO_BIN_EXE_gchaos"))
        .args(["hermite-table", "--max-degree", "31", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL hermite.n=31"));
}

#[test]
fn csv_only_output() {
    let dir = tempfile::tempdir().unwrap();
    let doc = CLASSICAL.replace(r#""seed": 5"#, r#""seed": 5, "formats": ["csv"], "payoffs": [], "moment_checks": false"#);
    let out = run(dir.path(), &doc, &["verify"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!dir.path().join("out/verify_report.json").exists());
    let checks = fs::read_to_string(dir.path().join("out/verify_checks.csv")).unwrap();
    assert!(checks.starts_with("name,passed,value,threshold,detail\n"));
}
