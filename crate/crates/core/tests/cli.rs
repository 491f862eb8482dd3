use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fracwell::cli::TvpSummary;
use fracwell::sweep::SweepSummary;
use fracwell::tvp::TvpMethod;

fn fracwell(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracwell"))
        .args(&args[..1])
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(&args[1..])
        .env("FRACWELL_THREADS", "2")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const LINEAR_RHS: &str =
    r#"{ "name": "linear", "params": { "lambda": 1 }, "lipschitz_L": 1, "bound_M": "unbounded" }"#;

fn ivp_config(extra: &str) -> String {
    format!(
        r#"{{ "command": "solve-ivp",
             "problem": {{ "alpha": 0.5, "a": 0, "T": 1, "init": [1], "rhs": {LINEAR_RHS} }},
             "solver": {{ "n_steps": 128 }} {extra} }}"#
    )
}

#[test]
fn solve_ivp_writes_one_row_per_node() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ivp.json", &ivp_config(""));
    let out = dir.path().join("ivp.csv");
    let o = fracwell(&["solve-ivp"], &cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.split('\n').collect();
    assert_eq!(lines[0], "t,y");
    // header + 129 rows + trailing empty piece after the final newline
    assert_eq!(lines.len(), 131);
    assert_eq!(lines[130], "");
    let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first, vec![0.0, 1.0]);
    assert!(!csv.contains('\r'));
}

#[test]
fn both_formats_write_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ivp.json", &ivp_config(""));
    let out = dir.path().join("run.csv");
    let o = fracwell(&["solve-ivp", "--format", "both"], &cfg, &out);
    assert!(o.status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    assert!(summary["residual"].as_f64().unwrap() <= 1e-8);
    let stdout: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(stdout, summary);
}

#[test]
fn sweep_writes_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        r#"{{ "command": "sweep",
             "problem": {{ "alpha": 0.5, "a": 0, "T": 1, "init": [1], "rhs": {LINEAR_RHS} }},
             "solver": {{ "n_steps": 256 }},
             "sweep": {{ "mode": "start_shift", "deltas": [0.125, 0.0625, 0.03125, 0.015625, 0.0078125] }} }}"#
    );
    let cfg = write_config(dir.path(), "sweep.json", &body);
    let out = dir.path().join("sweep.csv");
    let o = fracwell(&["sweep", "--format", "both"], &cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "delta,sup_diff,bound_d1,bound_d2,bound_envelope,lower_bound,status");
    assert_eq!(lines.len(), 6);
    for line in &lines[1..] {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 7);
        assert_eq!(cells[6], "ok");
        assert!(cells[..6].iter().all(|c| c.parse::<f64>().is_ok()), "{line}");
    }
    let text = std::fs::read_to_string(dir.path().join("sweep.json")).unwrap();
    let summary: SweepSummary = serde_json::from_str(&text).unwrap();
    assert_eq!(summary.predicted_exponent, 0.5);
    assert_eq!(summary.comparison_interval, [0.125, 1.0]);
    assert!(summary.fitted_exponent > 0.0);
    let raw: serde_json::Value = serde_json::from_str(&text).unwrap();
    let mut keys: Vec<&str> = raw.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(keys, ["comparison_interval", "fit_r2", "fitted_exponent", "mode", "predicted_exponent"]);
}

fn tvp_config(alpha: f64) -> String {
    format!(
        r#"{{ "command": "solve-tvp",
             "problem": {{ "alpha": {alpha}, "a": 0, "T": 1, "y_star": 5.0089800807622834663, "rhs": {LINEAR_RHS} }},
             "solver": {{ "n_steps": 256 }} }}"#
    )
}

#[test]
fn tvp_with_order_above_one_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tvp.json", &tvp_config(1.2));
    let out = dir.path().join("tvp.csv");
    let o = fracwell(&["solve-tvp"], &cfg, &out);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("0 < alpha < 1"));
    assert!(!out.exists());
}

#[test]
fn tvp_both_methods_write_two_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tvp.json", &tvp_config(0.5));
    let out = dir.path().join("tvp.csv");
    let o = fracwell(&["solve-tvp", "--method", "both", "--format", "both"], &cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.exists());
    assert!(dir.path().join("tvp.shooting.csv").exists());
    let summaries: Vec<TvpSummary> =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("tvp.json")).unwrap()).unwrap();
    assert_eq!(summaries[0].method, TvpMethod::Fredholm);
    assert_eq!(summaries[1].method, TvpMethod::Shooting);
    for s in &summaries {
        assert!((s.recovered_initial - 1.0).abs() < 1e-2);
        assert!(s.residual <= 1e-7);
    }
}

#[test]
fn schema_errors_exit_one_and_list_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{ "command": "solve-ivp", "mystery": 1,
        "problem": { "alpha": 0.5, "a": 0, "T": 1, "init": [1, 2],
                     "rhs": { "name": "fancy", "lipschitz_L": 1, "bound_M": 1 } } }"#;
    let cfg = write_config(dir.path(), "bad.json", body);
    let o = fracwell(&["solve-ivp"], &cfg, &dir.path().join("x.csv"));
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("mystery"));
    assert!(err.contains("init length must equal ceil(alpha)=1"));
    assert!(err.contains("fancy") && err.contains("cos_forced"));
}

#[test]
fn solver_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{ "command": "solve-ivp",
        "problem": { "alpha": 0.9, "a": 0, "T": 5, "init": [2],
                     "rhs": { "name": "logistic", "params": { "r": -8 }, "lipschitz_L": 100, "bound_M": "unbounded" } },
        "solver": { "n_steps": 200 } }"#;
    let cfg = write_config(dir.path(), "boom.json", body);
    let out = dir.path().join("boom.csv");
    let o = fracwell(&["solve-ivp"], &cfg, &out);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists());
}

#[test]
fn ml_command_tabulates_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ml.json", r#"{ "command": "ml", "ml": { "alpha": 1, "z": [0, 1, -2] } }"#);
    let out = dir.path().join("ml.csv");
    let o = fracwell(&["ml"], &cfg, &out);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert!((r[1] - r[0].exp()).abs() < 1e-14);
    }
}

#[test]
fn numbers_round_trip_losslessly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ml.json", r#"{ "command": "ml", "ml": { "alpha": 0.5, "z": [0.1, 0.7] } }"#);
    let out = dir.path().join("ml.csv");
    assert!(fracwell(&["ml"], &cfg, &out).status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    for (line, z) in csv.lines().skip(1).zip([0.1, 0.7]) {
        let value: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(value, fracwell::ml(0.5, z).unwrap());
    }
}

#[test]
fn command_must_match_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ivp.json", &ivp_config(""));
    let o = fracwell(&["sweep"], &cfg, &dir.path().join("x.csv"));
    assert_eq!(o.status.code(), Some(1));
}
