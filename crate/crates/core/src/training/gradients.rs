use std::borrow::Borrow;

use rayon::prelude::*;

use crate::data::{stack_samples, WindowSample};
use crate::error::{Error, Result};
use crate::model::{backward, forward_batch, predict_batch, Mode, ModelConfig, SegRnnParams};
use crate::numerics::{Real, Rng};

use super::loss::{mae_gradient, ErrorSums, Metrics};

/// Samples per worker task. Fixed so results do not depend on the thread count.
pub const CHUNK: usize = 32;

/// Mean MAE over the batch and its exact gradient.
///
/// The batch is cut into fixed chunks that run in parallel, each with its own
/// random stream drawn from `rng` in order, and the partial gradients are summed
/// in chunk order.
pub fn compute_gradients<S: Borrow<WindowSample> + Sync>(
    batch: &[S],
    params: &SegRnnParams,
    cfg: &ModelConfig,
    mode: Mode,
    rng: &mut Rng,
) -> Result<(Real, SegRnnParams)> {
    if batch.is_empty() {
        return Err(Error::Precondition("gradient of an empty batch".into()));
    }
    let total = (batch.len() * cfg.horizon) as Real;
    let seeds: Vec<u64> = batch.chunks(CHUNK).map(|_| rng.next_u64()).collect();
    let parts: Vec<Result<(Real, SegRnnParams)>> = batch
        .par_chunks(CHUNK)
        .zip(seeds)
        .map(|(chunk, seed)| {
            let (x, y, channels) = stack_samples(chunk)?;
            let mut local = Rng::new(seed);
            let (pred, cache) = forward_batch(&x, &channels, params, cfg, mode, &mut local)?;
            let dy = mae_gradient(&pred, &y, 1.0 / total)?;
            let grads = backward(params, cfg, &cache, &dy)?;
            Ok((ErrorSums::of(&pred, &y).abs, grads))
        })
        .collect();
    let mut abs = 0.0;
    let mut grads: Option<SegRnnParams> = None;
    for part in parts {
        let (a, g) = part?;
        abs += a;
        match grads.as_mut() {
            Some(acc) => acc.add_assign(&g),
            None => grads = Some(g),
        }
    }
    Ok((abs / total, grads.expect("non-empty batch")))
}

/// Mean MAE of eval-mode predictions, without gradients.
pub fn batch_loss<S: Borrow<WindowSample> + Sync>(
    batch: &[S],
    params: &SegRnnParams,
    cfg: &ModelConfig,
) -> Result<Real> {
    Ok(error_sums(batch, params, cfg)?.mae())
}

/// Eval-mode MSE and MAE over a sample set.
pub fn evaluate<S: Borrow<WindowSample> + Sync>(
    samples: &[S],
    params: &SegRnnParams,
    cfg: &ModelConfig,
) -> Result<Metrics> {
    if samples.is_empty() {
        return Err(Error::Precondition("evaluation on an empty set".into()));
    }
    Ok(error_sums(samples, params, cfg)?.metrics())
}

fn error_sums<S: Borrow<WindowSample> + Sync>(
    samples: &[S],
    params: &SegRnnParams,
    cfg: &ModelConfig,
) -> Result<ErrorSums> {
    let parts: Vec<Result<ErrorSums>> = samples
        .par_chunks(4 * CHUNK)
        .map(|chunk| {
            let (x, y, channels) = stack_samples(chunk)?;
            let pred = predict_batch(&x, &channels, params, cfg, Mode::Eval, &mut Rng::new(0))?;
            Ok(ErrorSums::of(&pred, &y))
        })
        .collect();
    let mut sums = ErrorSums::default();
    for p in parts {
        sums.merge(&p?);
    }
    Ok(sums)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::make_windows;
    use crate::numerics::Matrix;

    fn setup() -> (ModelConfig, SegRnnParams, Vec<WindowSample>) {
        let cfg = ModelConfig::new(8, 4, 4, 6, 2);
        let params = SegRnnParams::init(&cfg, &mut Rng::new(11)).unwrap();
        let mut rng = Rng::new(12);
        let v = Matrix::from_vec(40, 2, (0..80).map(|_| rng.uniform(-1.0, 1.0)).collect()).unwrap();
        (cfg, params, make_windows(&v, 8, 4, 1).unwrap())
    }

    #[test]
    fn perfect_fit_has_zero_gradient() {
        let (cfg, params, mut samples) = setup();
        samples.truncate(5);
        for s in &mut samples {
            s.y =
                crate::model::predict(&s.x, s.channel, &params, &cfg, Mode::Eval, &mut Rng::new(0))
                    .unwrap();
        }
        let (loss, g) =
            compute_gradients(&samples, &params, &cfg, Mode::Eval, &mut Rng::new(1)).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(g.global_norm(), 0.0);
    }

    #[test]
    fn duplicated_batch_is_invariant() {
        let (cfg, params, samples) = setup();
        let batch: Vec<&WindowSample> = samples.iter().take(20).collect();
        let doubled: Vec<&WindowSample> = batch.iter().flat_map(|s| [*s, *s]).collect();
        let (l1, g1) =
            compute_gradients(&batch, &params, &cfg, Mode::Eval, &mut Rng::new(1)).unwrap();
        let (l2, g2) =
            compute_gradients(&doubled, &params, &cfg, Mode::Eval, &mut Rng::new(1)).unwrap();
        assert!((l1 - l2).abs() < 1e-12);
        for ((_, a), (_, b)) in g1.tensors().iter().zip(g2.tensors()) {
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn loss_matches_evaluation() {
        let (cfg, params, samples) = setup();
        let (loss, _) =
            compute_gradients(&samples, &params, &cfg, Mode::Eval, &mut Rng::new(1)).unwrap();
        let m = evaluate(&samples, &params, &cfg).unwrap();
        assert!((loss - m.mae).abs() < 1e-12);
        assert!((batch_loss(&samples, &params, &cfg).unwrap() - m.mae).abs() < 1e-12);
    }

    #[test]
    fn train_mode_is_reproducible_for_a_seed() {
        let (mut cfg, params, samples) = setup();
        cfg.dropout_rate = 0.3;
        let run = |seed| {
            compute_gradients(&samples, &params, &cfg, Mode::Train, &mut Rng::new(seed)).unwrap()
        };
        let (a, ga) = run(4);
        let (b, gb) = run(4);
        let (c, _) = run(5);
        assert_eq!((a, &ga), (b, &gb));
        assert_ne!(a, c);
    }

    #[test]
    fn empty_batch_is_rejected() {
        let (cfg, params, _) = setup();
        let none: Vec<WindowSample> = Vec::new();
        assert!(compute_gradients(&none, &params, &cfg, Mode::Eval, &mut Rng::new(1)).is_err());
        assert!(evaluate(&none, &params, &cfg).is_err());
    }
}
