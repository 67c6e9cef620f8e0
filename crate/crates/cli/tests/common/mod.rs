#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use segrnn_cli::{ExperimentSpec, SpecLayer};

/// Writes a two-channel noisy sine CSV plus a registry naming it `sine`.
/// Returns the registry path.
pub fn write_sine_dataset(dir: &Path, rows: usize) -> PathBuf {
    let mut csv = String::from("date,a,b\n");
    for t in 0..rows {
        let x = t as f64;
        let a = (x * 2.0 * std::f64::consts::PI / 24.0).sin() + 0.05 * ((x * 7.3).sin());
        let b = 0.5 * (x * 2.0 * std::f64::consts::PI / 12.0).cos() + 0.01 * x / rows as f64;
        writeln!(csv, "2020-01-01 {t:05},{a:.6},{b:.6}").unwrap();
    }
    fs::write(dir.join("sine.csv"), csv).unwrap();
    let registry = dir.join("registry.toml");
    fs::write(
        &registry,
        "[datasets.sine]\npath = \"sine.csv\"\nsplit = [0.6, 0.2, 0.2]\n",
    )
    .unwrap();
    registry
}

/// A small, fast spec on the sine dataset.
pub fn small_layer(registry: &Path, out: &Path) -> SpecLayer {
    SpecLayer {
        dataset: Some("sine".into()),
        lookback: Some(48),
        horizon: Some(24),
        seg_len: Some(12),
        hidden_dim: Some(8),
        dropout: Some(0.0),
        epochs: Some(3),
        patience: Some(3),
        batch_size: Some(32),
        lr: Some(5e-3),
        out: Some(out.to_path_buf()),
        registry: Some(registry.to_path_buf()),
        timing_batch: Some(16),
        timing_repeats: Some(2),
        ..SpecLayer::default()
    }
}

pub fn small_spec(dir: &Path) -> ExperimentSpec {
    let registry = write_sine_dataset(dir, 400);
    small_layer(&registry, &dir.join("out"))
        .resolve_from_data()
        .unwrap()
}
