//! Shared fixtures for the benchmarks.

use segrnn_core::{Matrix, ModelConfig, Rng, SegRnnParams};

/// Initialized parameters plus `batch` random windows with round-robin channels.
pub fn fixture(cfg: &ModelConfig, batch: usize, seed: u64) -> (SegRnnParams, Matrix, Vec<usize>) {
    let mut rng = Rng::new(seed);
    let params = SegRnnParams::init(cfg, &mut rng).expect("valid benchmark config");
    let data = (0..batch * cfg.lookback)
        .map(|_| rng.uniform(-1.0, 1.0))
        .collect();
    let x = Matrix::from_vec(batch, cfg.lookback, data).expect("shape");
    let channels = (0..batch).map(|i| i % cfg.num_channels).collect();
    (params, x, channels)
}
