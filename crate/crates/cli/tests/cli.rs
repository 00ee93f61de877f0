mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use common::{dir_files, trajectory, Table};
use daas_cli::runner::OUTPUT_FILES;
use tempfile::TempDir;

fn repo_root() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../.."))
}

fn daas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_daas"))
        .current_dir(repo_root())
        .args(args)
        .output()
        .unwrap()
}

fn run_app(app: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", app, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = daas(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    o
}

#[test]
fn unknown_policy_exits_one_and_lists_policies() {
    let o = daas(&["run", "vip-follow", "--scheduler", "bogus"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    for p in ["edge-only", "cloud-only", "ec", "queue-aware"] {
        assert!(err.contains(p), "{err}");
    }
}

#[test]
fn validation_failures_exit_one() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    for args in [
        vec!["run", "vip-follow", "--duration", "0", "--out", out],
        vec!["run", "survey", "--config", "no/such/config.json", "--out", out],
        vec!["run", "survey", "--config", "https://example.com/env.json", "--out", out],
        vec!["run", "nope"],
        vec!["run", "survey", "--service-time", "edge=5", "--out", out],
    ] {
        let o = daas(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
    assert_eq!(daas(&["--help"]).status.code(), Some(0));
}

#[test]
fn loc_audit_subcommand_passes() {
    let o = daas(&["loc-audit"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    for app in ["vip-follow", "situation-awareness", "survey", "wildfire"] {
        assert!(text.contains(app), "{text}");
    }
}

#[test]
fn every_output_file_is_written() {
    let dir = TempDir::new().unwrap();
    run_app("vip-follow", dir.path(), &["--duration", "20"]);
    for f in OUTPUT_FILES {
        let meta = std::fs::metadata(dir.path().join(f)).unwrap_or_else(|e| panic!("{f}: {e}"));
        assert!(meta.len() > 0, "{f} is empty");
    }
    let plan: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("plan.json")).unwrap()).unwrap();
    assert!(plan.is_object());
    let svg = std::fs::read_to_string(dir.path().join("plot.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(
        Table::read(&dir.path().join("latency.csv")).header.join(","),
        "frame_seq,t_capture_ms,t_dispatch_ms,t_infer_start_ms,t_infer_end_ms,t_command_ms"
    );
}

#[test]
fn same_seed_gives_identical_bytes() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for d in [&a, &b] {
        run_app("situation-awareness", d.path(), &["--duration", "30", "--seed", "11"]);
    }
    let (fa, fb) = (dir_files(a.path()), dir_files(b.path()));
    assert!(!fa.is_empty());
    assert_eq!(fa, fb);
    for (name, bytes) in &fa {
        if name.extension().is_some_and(|e| e == "csv") {
            assert!(!bytes.contains(&b'\r'), "{}", name.display());
        }
    }
}

/// Reference nearest-rank percentile, written independently of the report.
fn percentile(sorted: &[f64], p: usize) -> f64 {
    let n = sorted.len();
    let rank = (p * n).div_ceil(100).max(1);
    sorted[rank - 1]
}

fn summary_lines(out: &Path) -> BTreeMap<String, String> {
    std::fs::read_to_string(out.join("summary.txt"))
        .unwrap()
        .lines()
        .filter_map(|l| l.split_once(": "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn close(summary: &str, expected: f64, tol: f64) -> bool {
    summary.parse::<f64>().is_ok_and(|v| (v - expected).abs() <= tol)
}

#[test]
fn summary_is_recomputable_from_csvs() {
    let dir = TempDir::new().unwrap();
    run_app("vip-follow", dir.path(), &["--duration", "40"]);
    let s = summary_lines(dir.path());
    let lat = Table::read(&dir.path().join("latency.csv"));
    let (cap, disp, end, cmd) = (
        lat.col("t_capture_ms"),
        lat.col("t_dispatch_ms"),
        lat.col("t_infer_end_ms"),
        lat.col("t_command_ms"),
    );
    assert_eq!(s["frames"], cap.len().to_string());
    let e2e: Vec<f64> = cmd.iter().zip(&cap).map(|(c, t)| c - t).collect();
    let inf: Vec<f64> = end.iter().zip(&disp).map(|(e, d)| e - d).collect();
    let ovh: Vec<f64> = e2e.iter().zip(&inf).map(|(a, b)| a - b).collect();
    for (key, values) in [("end_to_end_ms", e2e), ("inference_ms", inf), ("overhead_ms", ovh)] {
        let mut v = values;
        v.sort_by(f64::total_cmp);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let fields: Vec<&str> = s[key].split_whitespace().collect();
        assert_eq!(fields.len(), 6, "{key}: {}", s[key]);
        assert!(close(fields[1], mean, 1.5e-3), "{key} mean {} vs {mean}", fields[1]);
        assert!(close(fields[3], percentile(&v, 50), 1.5e-3), "{key} median");
        assert!(close(fields[5], percentile(&v, 95), 1.5e-3), "{key} p95");
    }

    let traj = trajectory(dir.path());
    let dist: f64 = traj
        .windows(2)
        .map(|w| ((w[1][1] - w[0][1]).powi(2) + (w[1][2] - w[0][2]).powi(2) + (w[1][3] - w[0][3]).powi(2)).sqrt())
        .sum();
    // the CSV rounds positions to the millimetre
    assert!(close(&s["distance_m"], dist, 1e-3 * traj.len() as f64), "{} vs {dist}", s["distance_m"]);
    let battery = Table::read(&dir.path().join("battery.csv")).col("percent");
    assert!(close(&s["final_battery_pct"], *battery.last().unwrap(), 1e-9));
}

#[test]
fn survey_from_defaults_returns_home() {
    let dir = TempDir::new().unwrap();
    run_app("survey", dir.path(), &["--duration", "400"]);
    let last = *trajectory(dir.path()).last().unwrap();
    assert!(last[1].hypot(last[2]) < 0.5 && last[3].abs() < 1e-3, "{last:?}");
    let gps = Table::read(&dir.path().join("data/gps.csv"));
    assert!(!gps.rows.is_empty());
    assert!(dir.path().join("data/camera_manifest.csv").exists());
}
