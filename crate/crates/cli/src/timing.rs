use std::time::Instant;

use serde::{Deserialize, Serialize};

use segrnn_core::model::predict_batch;
use segrnn_core::{Matrix, Mode, ModelConfig, Result, Rng, SegRnnParams};

pub const WARMUP_RUNS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub mean_seconds: f64,
    /// Population standard deviation over the timed repeats.
    pub std_seconds: f64,
    pub repeats: usize,
}

/// Wall-clock time of eval-mode prediction on `batch` synthetic windows,
/// after [`WARMUP_RUNS`] untimed calls.
pub fn time_inference(
    params: &SegRnnParams,
    cfg: &ModelConfig,
    batch: usize,
    repeats: usize,
) -> Result<Timing> {
    let mut rng = Rng::new(0);
    let x = Matrix::from_vec(
        batch,
        cfg.lookback,
        (0..batch * cfg.lookback)
            .map(|_| rng.uniform(-1.0, 1.0))
            .collect(),
    )?;
    let channels: Vec<usize> = (0..batch).map(|i| i % cfg.num_channels).collect();
    time_inference_on(&x, &channels, params, cfg, repeats)
}

/// [`time_inference`] on caller-supplied windows.
pub fn time_inference_on(
    x: &Matrix,
    channels: &[usize],
    params: &SegRnnParams,
    cfg: &ModelConfig,
    repeats: usize,
) -> Result<Timing> {
    let repeats = repeats.max(1);
    let mut rng = Rng::new(0);
    for _ in 0..WARMUP_RUNS {
        std::hint::black_box(predict_batch(
            x,
            channels,
            params,
            cfg,
            Mode::Eval,
            &mut rng,
        )?);
    }
    let mut samples = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let start = Instant::now();
        std::hint::black_box(predict_batch(
            x,
            channels,
            params,
            cfg,
            Mode::Eval,
            &mut rng,
        )?);
        samples.push(start.elapsed().as_secs_f64());
    }
    let mean = samples.iter().sum::<f64>() / repeats as f64;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / repeats as f64;
    Ok(Timing {
        mean_seconds: mean,
        std_seconds: var.sqrt(),
        repeats,
    })
}
