//! Black-box tests of the `modekit` binary.

use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_modekit"))
}

fn write_two_tone_csv(path: &Path) {
    let fs = 400.0;
    let mut text = String::from("sample_rate=400\n");
    for i in 0..512 {
        let t = i as f64 / fs;
        let a = (2.0 * PI * 5.0 * t).sin() + (2.0 * PI * 40.0 * t).sin();
        let b = 0.5 * (2.0 * PI * 2.0 * t).sin() + (2.0 * PI * 20.0 * t).sin();
        text.push_str(&format!("{a},{b}\n"));
    }
    std::fs::write(path, text).unwrap();
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn decompose_writes_modes_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("signals.csv");
    write_two_tone_csv(&input);
    let outdir = dir.path().join("out");

    let out = bin()
        .arg("decompose")
        .args([input.to_str().unwrap(), outdir.to_str().unwrap()])
        .args(["--method", "emd", "--plot"])
        .args(["--max-iter", "200"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));

    for file in [
        "imfs_0.csv",
        "imfs_1.csv",
        "decomp_0.svg",
        "decomp_1.svg",
        "report.json",
    ] {
        assert!(outdir.join(file).exists(), "{file} missing");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(outdir.join("report.json")).unwrap())
            .unwrap();
    let entries = report.as_array().unwrap();
    assert_eq!(entries.len(), 2);
    assert!(entries[0]["report"]["imf_count"].as_u64().unwrap() >= 2);
    assert!(entries[0]["report"]["ecm"].as_f64().unwrap() < 1e-18);

    // the modes CSV parses back in the signal format
    let modes = std::fs::read_to_string(outdir.join("imfs_0.csv")).unwrap();
    assert!(modes.starts_with("sample_rate=400"));
}

#[test]
fn decompose_rejects_missing_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("decompose")
        .arg(dir.path().join("nope.csv"))
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_str(stderr(&out).trim()).unwrap();
    assert!(err["error"].as_str().unwrap().contains("input not found"));
}

#[test]
fn decompose_rejects_ensemble_flags_for_plain_emd() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("signals.csv");
    write_two_tone_csv(&input);
    let out = bin()
        .arg("decompose")
        .args([input.to_str().unwrap()])
        .arg(dir.path().join("out"))
        .args(["--method", "emd", "--nr", "100"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("nr is not applicable to emd"));
}

fn write_sweep_spec(dir: &Path, csv: &Path) -> std::path::PathBuf {
    let spec = serde_json::json!({
        "method": "eemd",
        "criteria": [
            { "rule": { "fixed_exact": { "n": 5 } }, "max_iter": 10 },
            { "rule": { "dual_threshold": { "theta1": 0.05, "theta2": 0.5, "alpha": 0.05 } },
              "max_iter": 10 }
        ],
        "nstd": [0.02],
        "nr": [20],
        "signals": { "csv": [csv.to_str().unwrap()] },
        "master_seed": 7
    });
    let path = dir.join("spec.json");
    std::fs::write(&path, serde_json::to_string_pretty(&spec).unwrap()).unwrap();
    path
}

/// Drops the time column (index 8) from every CSV line.
fn strip_time_column(csv: &str) -> String {
    csv.lines()
        .map(|line| {
            line.split(',')
                .enumerate()
                .filter(|(i, _)| *i != 8)
                .map(|(_, f)| f)
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn sweep_runs_the_grid_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("signals.csv");
    write_two_tone_csv(&input);
    let spec = write_sweep_spec(dir.path(), &input);

    let run = |outdir: &Path, threads: &str| {
        let out = bin()
            .arg("sweep")
            .args([spec.to_str().unwrap(), outdir.to_str().unwrap()])
            .args(["--threads", threads, "--plot"])
            .output()
            .unwrap();
        assert!(out.status.success(), "stderr: {}", stderr(&out));
    };
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    run(&out1, "1");
    run(&out2, "8");

    let csv = std::fs::read_to_string(out1.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.trim_end().lines().collect();
    assert!(lines[0].starts_with("method,criterion,nstd,nr,max_iter,signal_id"));
    // 2 grid points x 2 signals, plus one aggregate row per grid point
    assert_eq!(lines.len(), 1 + 2 * 2 + 2);
    assert_eq!(csv.matches("mean[2/2]").count(), 2);
    assert!(out1.join("sweep.svg").exists());

    let other = std::fs::read_to_string(out2.join("sweep.csv")).unwrap();
    assert_eq!(
        strip_time_column(&csv),
        strip_time_column(&other),
        "sweep output depends on the thread count"
    );
}

#[test]
fn sweep_rejects_an_empty_grid() {
    let dir = tempfile::tempdir().unwrap();
    let spec = serde_json::json!({
        "method": "eemd",
        "criteria": [{ "rule": { "fixed_exact": { "n": 5 } }, "max_iter": 10 }],
        "nstd": [],
        "nr": [],
        "signals": "corpus"
    });
    let path = dir.path().join("spec.json");
    std::fs::write(&path, spec.to_string()).unwrap();
    let out = bin()
        .arg("sweep")
        .args([path.to_str().unwrap()])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("empty sweep grid"));
}

#[test]
fn report_renders_an_existing_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("signals.csv");
    write_two_tone_csv(&input);
    let spec = write_sweep_spec(dir.path(), &input);
    let sweep_out = dir.path().join("sweep");
    let out = bin()
        .arg("sweep")
        .args([spec.to_str().unwrap(), sweep_out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));

    let report_out = dir.path().join("report");
    let out = bin()
        .arg("report")
        .arg(sweep_out.join("sweep.json"))
        .arg(&report_out)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(report_out.join("sweep.svg").exists());
    let table = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(table.starts_with("method\tcriterion"));
    assert!(table.contains("mean[2/2]"));
}

#[test]
fn seed_env_var_matches_explicit_flag() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("signals.csv");
    write_two_tone_csv(&input);

    let run = |outdir: &Path, use_env: bool| {
        let mut cmd = bin();
        cmd.arg("decompose")
            .args([input.to_str().unwrap(), outdir.to_str().unwrap()])
            .args(["--method", "eemd", "--nr", "10", "--max-iter", "10"]);
        if use_env {
            cmd.env("MODEKIT_SEED", "99");
        } else {
            cmd.env_remove("MODEKIT_SEED").args(["--seed", "99"]);
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success(), "stderr: {}", stderr(&out));
    };
    let via_env = dir.path().join("env");
    let via_flag = dir.path().join("flag");
    run(&via_env, true);
    run(&via_flag, false);
    for file in ["imfs_0.csv", "imfs_1.csv"] {
        assert_eq!(
            std::fs::read(via_env.join(file)).unwrap(),
            std::fs::read(via_flag.join(file)).unwrap(),
            "{file} differs between env-var and flag seeding"
        );
    }
}
