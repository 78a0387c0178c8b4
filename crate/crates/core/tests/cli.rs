use std::path::Path;
use std::process::Command;

use serde_json::Value;

const SKM: &str = env!("CARGO_BIN_EXE_skm");

fn run(args: &[&str], dir: &Path) -> (i32, String) {
    let out = Command::new(SKM).args(args).current_dir(dir).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn without_timing(report: &str) -> String {
    report.lines().filter(|l| !l.contains("\"seconds\"")).collect::<Vec<_>>().join("\n")
}

/// Runs `suite` twice into separate directories; checks the exit code, the schema and that the
/// reports agree byte for byte apart from timing.
fn end_to_end(suite: &str, extra: &[&str], expect: i32) -> Value {
    let tmp = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for run_dir in ["a", "b"] {
        let out = tmp.path().join(run_dir);
        let mut args = vec![suite, "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        let (code, stdout) = run(&args, tmp.path());
        assert_eq!(code, expect, "{suite}: {stdout}");
        let file = std::fs::read_to_string(out.join(format!("{suite}.json"))).unwrap();
        assert_eq!(file, stdout);
        texts.push(file);
    }
    assert_eq!(without_timing(&texts[0]), without_timing(&texts[1]), "{suite} is not reproducible");
    let csv = |d: &str| std::fs::read(tmp.path().join(d).join(format!("{suite}.csv"))).ok();
    assert_eq!(csv("a"), csv("b"));
    let v: Value = serde_json::from_str(&texts[0]).unwrap();
    assert_eq!(v["suite"], suite);
    assert!(v["config"].is_object());
    assert!(v["seed"].is_u64());
    let checks = v["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    for c in checks {
        assert!(c["name"].is_string() && c["value"].is_number() && c["tol"].is_number() && c["pass"].is_boolean());
    }
    let all = checks.iter().all(|c| c["pass"] == true);
    assert_eq!(v["pass"], all);
    assert_eq!(all, expect == 0);
    v
}

#[test]
fn verify_ricci() {
    let v = end_to_end("verify-ricci", &["--k", "1", "--l", "2"], 0);
    let first = &v["checks"][0];
    assert!(first["value"].as_f64().unwrap() <= 1e-6);
    assert_eq!(v["config"]["grid"], 20);
}

#[test]
fn verify_kahler() {
    end_to_end("verify-kahler", &["--grid", "8"], 0);
}

#[test]
fn holonomy() {
    end_to_end("holonomy", &["--k", "2", "--l", "3", "--seed", "5"], 0);
}

#[test]
fn gh_compare() {
    let v = end_to_end("gh-compare", &["--k", "1", "--l", "1"], 0);
    assert!(v["data"]["c"].as_f64().unwrap() > 0.0);
}

#[test]
fn gh_curl() {
    end_to_end("gh-curl", &["--seed", "3"], 0);
}

#[test]
fn gluing_scan() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"doubling": false}"#).unwrap();
    let v = end_to_end("gluing-scan", &["--config", cfg.to_str().unwrap()], 0);
    assert_eq!(v["config"]["doubling"], false);
}

#[test]
fn gluing_scan_table_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"doubling": false}"#).unwrap();
    let (code, _) = run(&["gluing-scan", "--config", "cfg.json", "--out", "."], tmp.path());
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(tmp.path().join("gluing-scan.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    let header: Vec<&str> = lines[0].split(',').collect();
    assert_eq!(header[0], "t");
    for line in &lines[1..] {
        let row: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(row.len(), header.len());
        for (h, v) in header.iter().zip(&row) {
            if h.ends_with("_slope") {
                assert!((3.8..=4.2).contains(v), "{h} = {v}");
            }
        }
    }
}

#[test]
fn fixed_points() {
    end_to_end("fixed-points", &["--seed", "11"], 0);
}

#[test]
fn admissible_p() {
    let v = end_to_end("admissible-p", &["--max", "12"], 0);
    assert_eq!(v["data"]["orders"], serde_json::json!([3, 4, 6]));
}

#[test]
fn moduli_dims() {
    let v = end_to_end("moduli-dims", &[], 0);
    let totals: Vec<u64> =
        v["data"]["routes"].as_array().unwrap().iter().map(|r| r["total"].as_u64().unwrap()).collect();
    assert_eq!(totals, vec![58, 58]);
}

#[test]
fn g2_torsion() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"doubling": false}"#).unwrap();
    let v = end_to_end("g2-torsion", &["--config", cfg.to_str().unwrap()], 0);
    assert_eq!(v["data"]["torsion"]["hypotheses"]["B_ii"], "NOT CHECKED");
    let slope = v["data"]["torsion"]["slope"]["slope"].as_f64().unwrap();
    assert!((3.7..=4.3).contains(&slope));
}

#[test]
fn g2_algebra() {
    end_to_end("g2-algebra", &[], 0);
}

#[test]
fn failing_checks_exit_one() {
    end_to_end("verify-ricci", &["--grid", "4", "--tol", "1e-30"], 1);
    let tmp = tempfile::tempdir().unwrap();
    // no single constant at an impossible tolerance
    assert_eq!(run(&["gh-compare", "--grid", "4", "--tol", "1e-30"], tmp.path()).0, 1);
}

#[test]
fn config_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    assert_eq!(run(&["gluing-scan", "--t", "0.1"], d).0, 2);
    assert_eq!(run(&["g2-torsion", "--t", "0.05,0.1,0.2"], d).0, 2);
    assert_eq!(run(&["verify-ricci", "--k", "0"], d).0, 2);
    assert_eq!(run(&["verify-ricci", "--tol", "-1"], d).0, 2);
    assert_eq!(run(&["verify-ricci", "--grid", "1"], d).0, 2);
    assert_eq!(run(&["not-a-suite"], d).0, 2);
    assert_eq!(run(&["verify-ricci", "--config", "missing.json"], d).0, 2);
    std::fs::write(d.join("unknown.json"), r#"{"colour": 1}"#).unwrap();
    assert_eq!(run(&["verify-ricci", "--config", "unknown.json"], d).0, 2);
    std::fs::write(d.join("broken.json"), "{").unwrap();
    assert_eq!(run(&["verify-ricci", "--config", "broken.json"], d).0, 2);
}

#[test]
fn numerical_failure_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("cfg.json"), r#"{"ode_tol": 1e-300}"#).unwrap();
    let (code, stdout) = run(&["holonomy", "--config", "cfg.json"], tmp.path());
    assert_eq!(code, 3);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["pass"], false);
    assert!(v["error"].is_string());
}

#[test]
fn flags_override_config() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("cfg.json"), r#"{"k": 0, "l": 3, "seed": 9, "grid": 4}"#).unwrap();
    let (code, stdout) = run(&["verify-ricci", "--config", "cfg.json", "--k", "2"], tmp.path());
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["config"]["k"], 2);
    assert_eq!(v["config"]["l"], 3);
    assert_eq!(v["seed"], 9);
    assert_eq!(v["config"]["grid"], 4);
}

#[test]
fn floats_have_seventeen_digits() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, stdout) = run(&["verify-kahler", "--grid", "4"], tmp.path());
    let v: Value = serde_json::from_str(&stdout).unwrap();
    let tol = v["checks"][0]["tol"].as_f64().unwrap();
    assert!(stdout.contains(&format!("\"tol\": {tol:.16e}")));
}

#[test]
fn help_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(&["--help"], tmp.path()).0, 0);
}
