use std::path::Path;
use std::process::{Command, Output};

use fgsr::results::read_table;

const BIN: &str = env!("CARGO_BIN_EXE_fgsr");

fn fgsr(args: &[&str], out: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("FGSR_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn unknown_method_lists_registered_methods() {
    let dir = tempfile::tempdir().unwrap();
    let o = fgsr(
        &["complete", "--synthetic", "20x20:r2", "--method", "maxnorm"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    let msg = stderr(&o);
    assert_eq!(msg.trim().lines().count(), 1, "{msg}");
    for name in ["maxnorm", "fgsr23", "fgsr12", "f_nuclear", "svt"] {
        assert!(msg.contains(name), "{msg}");
    }
}

#[test]
fn missing_required_flag_prints_usage() {
    let dir = tempfile::tempdir().unwrap();
    let o = fgsr(&["rpca", "--density", "0.1"], dir.path());
    assert!(!o.status.success());
    let msg = stderr(&o);
    assert!(msg.contains("--synthetic"), "{msg}");
    assert!(msg.contains("Usage"), "{msg}");
}

#[test]
fn rpca_with_zero_density_has_no_sparse_part() {
    let dir = tempfile::tempdir().unwrap();
    let o = fgsr(
        &["rpca", "--synthetic", "40x40:r3", "--density", "0"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let t = read_table(&dir.path().join("results.csv")).unwrap();
    assert_eq!(t.get(0, "sparse_support"), Some("0"));
    assert_eq!(
        t.get(0, "sparse_max_abs").unwrap().parse::<f64>().unwrap(),
        0.0
    );
    let err: f64 = t.get(0, "relative_error").unwrap().parse().unwrap();
    assert!(err <= 1e-4, "{err}");
}

#[test]
fn ratings_run_reports_nmae_and_rmse() {
    let dir = tempfile::tempdir().unwrap();
    let ratings = format!("{}/tests/fixtures/ratings.txt", env!("CARGO_MANIFEST_DIR"));
    let o = fgsr(
        &[
            "complete",
            "--ratings",
            &ratings,
            "--sample",
            "0.7",
            "--method",
            "fgsr12",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let t = read_table(&dir.path().join("results.csv")).unwrap();
    let nmae: f64 = t.get(0, "nmae").unwrap().parse().unwrap();
    let rmse: f64 = t.get(0, "rmse").unwrap().parse().unwrap();
    assert!(nmae > 0.0 && nmae < 0.25, "{nmae}");
    assert!(rmse > 0.0 && rmse < 0.35, "{rmse}");
    assert_eq!(t.get(0, "eval_set"), Some("test"));
    let manifest = std::fs::read_to_string(dir.path().join("results.csv.manifest.json")).unwrap();
    // The sparse item is filtered out and the re-indexing is recorded.
    assert!(manifest.contains("item_ids"));
    assert!(!manifest.contains("\"rare\""));
}

#[test]
fn synthetic_completion_writes_results() {
    let dir = tempfile::tempdir().unwrap();
    let o = fgsr(
        &[
            "complete",
            "--synthetic",
            "40x40:r3",
            "--missing",
            "0.5",
            "--seeds",
            "2",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let t = read_table(&dir.path().join("results.csv")).unwrap();
    assert_eq!(t.rows.len(), 2);
    for row in 0..2 {
        let err: f64 = t.get(row, "relative_error").unwrap().parse().unwrap();
        assert!(err <= 1e-3, "{err}");
        assert_eq!(t.get(row, "revealed_rank"), Some("3"));
    }
    assert!(dir.path().join("report.txt").exists());
}

#[test]
fn config_file_and_flags_layer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"d": 7, "max_iters": 3}"#).unwrap();
    let out = dir.path().join("out");
    let cfg_arg = cfg.to_str().unwrap();
    let o = fgsr(
        &[
            "complete",
            "--synthetic",
            "30x30:r2",
            "--config",
            cfg_arg,
            "--max-iters",
            "4",
        ],
        &out,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let t = read_table(&out.join("results.csv")).unwrap();
    assert_eq!(t.get(0, "d"), Some("7"));
    assert_eq!(t.get(0, "iterations"), Some("4"));

    std::fs::write(&cfg, r#"{"depth": 7}"#).unwrap();
    let o = fgsr(
        &["complete", "--synthetic", "30x30:r2", "--config", cfg_arg],
        &out,
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = fgsr(
        &[
            "sweep",
            "--synthetic",
            "30x30:r2",
            "--axis",
            "missing_rate",
            "--values",
            "0.3,0.5",
            "--method",
            "fgsr23,svt",
            "--seeds",
            "2",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_table(&dir.path().join("results.csv")).unwrap();
    assert_eq!(rows.rows.len(), 8);
    let summary = read_table(&dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.rows.len(), 4);
}
