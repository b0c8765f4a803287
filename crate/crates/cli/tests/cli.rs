// Copyright 2026 The Bipartite Landscape Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_landscape"))
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("experiment.toml");
    std::fs::write(&path, text).unwrap();
    path
}

const SMALL_BATH: &str = r#"
seeds = [4, 5]

[model]
kind = "random_bath"
bath_dim = 2

[horizon]
intervals = 4
t_final = 1.0

[target]
kind = "identity"

[init]
kind = "gaussian"
scale = 0.1

[optimizer]
max_iters = 40
"#;

#[test]
fn trivial_config_converges_at_iteration_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", "--config"])
        .arg(bundled("trivial.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let run = &summary["runs"][0];
    assert_eq!(run["status"], "converged");
    assert_eq!(run["iterations"], 0);
    let trace = std::fs::read_to_string(dir.path().join("trace_seed0.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(
        lines.next().unwrap(),
        "iter,F,one_minus_F,J,gamma,grad_norm,rank_Gc,rank_Gcphi,degenerate,finite_difference,sum_sin_omega,phi_grad_inf"
    );
    assert_eq!(lines.count(), 1);
}

#[test]
fn run_then_validate_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_BATH);
    let out_dir = dir.path().join("out");
    let status = bin()
        .args(["run", "--jobs", "2", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0), "{}", String::from_utf8_lossy(&status.stderr));
    for seed in [4, 5] {
        assert!(out_dir.join(format!("trace_seed{seed}.csv")).exists());
        assert!(out_dir.join(format!("spectra_seed{seed}.csv")).exists());
        assert!(out_dir.join(format!("controls_seed{seed}.csv")).exists());
    }
    let spectra = std::fs::read_to_string(out_dir.join("spectra_seed4.csv")).unwrap();
    assert!(spectra.starts_with("iter,matrix,index,sigma\n0,Gc,0,"));

    let check = bin().args(["validate", "--config"]).arg(&cfg).arg("--out").arg(&out_dir).output().unwrap();
    assert_eq!(check.status.code(), Some(0), "{}", String::from_utf8_lossy(&check.stdout));

    // Tampering with a fidelity entry breaks monotonicity or the replay.
    let path = out_dir.join("trace_seed5.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let last = lines.len() - 1;
    let mut fields: Vec<String> = lines[last].split(',').map(str::to_string).collect();
    fields[1] = "1.0000000000000000e-1".into();
    fields[2] = "9.0000000000000000e-1".into();
    lines[last] = fields.join(",");
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();
    let check = bin().args(["validate", "--config"]).arg(&cfg).arg("--out").arg(&out_dir).output().unwrap();
    assert_eq!(check.status.code(), Some(3));
}

#[test]
fn seed_offset_shifts_file_names() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL_BATH.replace("max_iters = 40", "max_iters = 2"));
    let out = bin()
        .args(["run", "--seed-offset", "10", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("trace_seed14.csv").exists());
    assert!(dir.path().join("trace_seed15.csv").exists());
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL_BATH.replace("bath_dim = 2", "bath_dim = 2\ncolour = 3"));
    let out = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));

    let out = bin().args(["run", "--config"]).arg(dir.path().join("missing.toml")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = bin().args(["run", "--rank-tol", "2", "--config"]).arg(bundled("trivial.toml")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gradcheck_passes_on_closed_config() {
    let out = bin()
        .args(["gradcheck", "--draws", "4", "--config"])
        .arg(bundled("closed.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(summary["max_rel_err_j"].as_f64().unwrap() <= 1e-6);
    assert!(summary["max_rel_err_f"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn gradcheck_flags_a_coarse_step() {
    let out = bin()
        .args(["gradcheck", "--draws", "2", "--step", "0.5", "--config"])
        .arg(bundled("closed.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn rankscan_reports_closed_identity_and_zero_system() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["rankscan", "--points", "2", "--config"])
        .arg(bundled("closed.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["closed_identity_failures"], 0);
    assert!(dir.path().join("rankscan.csv").exists());

    // No drift, a vanishing control and no inaccessible part: the only
    // nonzero row of the stacked gradient is the global-phase row.
    let zero = r#"
seeds = [0]
[model]
kind = "custom"
n_a = 2
n_b = 1
drift = [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]
controls = [[[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]]
[horizon]
intervals = 2
t_final = 1.0
[target]
kind = "random"
"#;
    let cfg = write_config(dir.path(), zero);
    let out = bin().args(["rankscan", "--points", "3", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["condition_met"], 0);
}
