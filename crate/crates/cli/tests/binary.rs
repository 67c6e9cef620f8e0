mod common;

use std::fs;
use std::process::Command;

use common::write_sine_dataset;

fn segrnn() -> Command {
    Command::new(env!("CARGO_BIN_EXE_segrnn"))
}

#[test]
fn params_count_at_full_scale() {
    let out = segrnn()
        .args([
            "params-count",
            "--dataset",
            "ETTh1",
            "--lookback",
            "720",
            "--horizon",
            "192",
        ])
        .args(["--seg-len", "48", "--hidden-dim", "512", "--channels", "7"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "1626928");
}

#[test]
fn invalid_config_exits_2() {
    let out = segrnn()
        .args([
            "params-count",
            "--dataset",
            "ETTh1",
            "--lookback",
            "96",
            "--seg-len",
            "7",
        ])
        .args(["--channels", "7"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn missing_dataset_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = segrnn()
        .args(["train", "--dataset", "ETTh1", "--data-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let registry = write_sine_dataset(dir.path(), 400);
    let config = dir.path().join("exp.toml");
    fs::write(
        &config,
        format!(
            "dataset = \"sine\"\nregistry = {:?}\nlookback = 48\nhorizon = 24\nseg_len = 12\n\
             hidden_dim = 8\nepochs = 1\npatience = 1\nbatch_size = 32\ntiming_batch = 8\ntiming_repeats = 1\n",
            registry
        ),
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = segrnn()
        .args(["train", "--config"])
        .arg(&config)
        .args(["--horizon", "12", "--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = segrnn_cli::Report::read_json(&out_dir.join("report.json")).unwrap();
    assert_eq!(report.model.horizon, 12);
    assert_eq!(report.model.lookback, 48);
    assert_eq!(report.model.num_channels, 2);

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "dataset = \"sine\"\nwidth = 3\n").unwrap();
    let out = segrnn()
        .args(["train", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn gradcheck_command_passes() {
    let out = segrnn()
        .args(["gradcheck", "--configs", "3", "--seed", "11"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("worst"));
}
