//! The command-line binary: exit codes, error JSON, hash headers and caching.

use std::path::Path;
use std::process::{Command, Output};

fn dspec(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dspec")).current_dir(dir).args(args).output().unwrap()
}

fn first_line(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn potential_check_emits_hashed_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dspec(dir.path(), &["potential-check", "--out", "pc.json"]);
    assert_eq!(out.status.code(), Some(0));
    let line = first_line(&dir.path().join("pc.json"));
    assert!(line.starts_with("{\"config_hash\": \""), "{line}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("pc.json")).unwrap()).unwrap();
    assert_eq!(v["report"]["spectral"]["is_generic"], true);
}

#[test]
fn bad_config_exits_2_with_error_json() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\"potential\": 3}").unwrap();
    let out = dspec(dir.path(), &["--config", "bad.json", "potential-check"]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "config");
}

#[test]
fn guard_violation_names_the_guard() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: serde_json::Value = serde_json::from_str(dspec::config::DEFAULT_CONFIG).unwrap();
    cfg["grids"]["n_r"] = serde_json::json!(200);
    std::fs::write(dir.path().join("c.json"), cfg.to_string()).unwrap();
    let out = dspec(dir.path(), &["--config", "c.json", "eigen-table"]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["message"].as_str().unwrap().contains("table grids"), "{err}");
}

#[test]
fn eigen_table_twice_reuses_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let a = dspec(dir.path(), &["eigen-table", "--out", "a.json"]);
    let b = dspec(dir.path(), &["eigen-table", "--out", "b.json"]);
    assert_eq!((a.status.code(), b.status.code()), (Some(0), Some(0)));
    let read = |n: &str| -> serde_json::Value { serde_json::from_str(&std::fs::read_to_string(dir.path().join(n)).unwrap()).unwrap() };
    let (ra, rb) = (read("a.json"), read("b.json"));
    assert_eq!(ra["report"]["cache_hit"], false);
    assert_eq!(rb["report"]["cache_hit"], true);
    assert_eq!(ra["report"]["table_hash"], rb["report"]["table_hash"]);
    let dump = dspec(dir.path(), &["dump-eigenfunctions", "--out", "ef.csv"]);
    assert_eq!(dump.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("ef.csv")).unwrap();
    assert!(text.starts_with("# config_hash="));
    assert_eq!(text.lines().nth(1), Some("ell,kappa,phase_shift"));
}

#[test]
fn evolve_writes_trace_snapshots_and_plot_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.json"), "{\"t_final\": 3.0, \"dt\": 0.05}").unwrap();
    let args = ["--config", "run.json", "evolve", "--out", "traj.csv", "--snapshots", "snaps", "--svg", "norms.svg", "--report", "rep.json"];
    dspec(dir.path(), &args);
    let first = std::fs::read(dir.path().join("traj.csv")).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    assert_eq!(text.lines().nth(1), Some("t,sobolev,w1,w2,sup_u,l6_u"));
    let hash = text.lines().next().unwrap().trim_start_matches("# config_hash=").to_string();
    assert_eq!(first_line(&dir.path().join("norms.svg")), format!("<!-- config_hash={hash} -->"));
    let svg = std::fs::read_to_string(dir.path().join("norms.svg")).unwrap();
    assert!(svg.contains("width=\"800\" height=\"600\"") && svg.matches("<polyline").count() == 5);
    let snaps: Vec<_> = std::fs::read_dir(dir.path().join("snaps")).unwrap().collect();
    assert_eq!(snaps.len(), 4);
    assert!(first_line(&dir.path().join("rep.json")).contains(&hash));
    dspec(dir.path(), &args);
    assert_eq!(std::fs::read(dir.path().join("traj.csv")).unwrap(), first);
}

#[test]
fn acceptance_subset_reports_one_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = dspec(dir.path(), &["acceptance", "--only", "1,8", "--out", "v.json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("v.json")).unwrap()).unwrap();
    assert_eq!(v["report"]["passed"], true);
    assert_eq!(v["report"]["criteria"].as_array().unwrap().len(), 2);
    let bad = dspec(dir.path(), &["acceptance", "--only", "11"]);
    assert_eq!(bad.status.code(), Some(2));
}
