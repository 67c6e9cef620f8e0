use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::WindowSample;
use crate::error::{Error, Result};
use crate::model::{Mode, ModelConfig, SegRnnParams};
use crate::numerics::{Real, Rng};

use super::adam::{adam_step, AdamState};
use super::config::{lr_at, TrainConfig};
use super::gradients::{compute_gradients, evaluate};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: Real,
    /// Validation MAE, the early-stopping criterion.
    pub val_loss: Real,
    pub val_mse: Real,
    pub lr: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch whose parameters were returned.
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl TrainHistory {
    pub fn best(&self) -> Option<&EpochRecord> {
        self.epochs.iter().find(|e| e.epoch == self.best_epoch)
    }

    pub fn last(&self) -> Option<&EpochRecord> {
        self.epochs.last()
    }

    pub fn mean_epoch_seconds(&self) -> f64 {
        if self.epochs.is_empty() {
            return 0.0;
        }
        self.epochs.iter().map(|e| e.seconds).sum::<f64>() / self.epochs.len() as f64
    }

    /// CSV with columns `epoch,train_loss,val_loss,lr,seconds`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |e: csv::Error| match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io {
                path: path.to_path_buf(),
                source,
            },
            other => Error::Format {
                path: path.to_path_buf(),
                msg: format!("{other:?}"),
            },
        };
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record(["epoch", "train_loss", "val_loss", "lr", "seconds"])
            .map_err(io)?;
        for e in &self.epochs {
            w.write_record([
                e.epoch.to_string(),
                e.train_loss.to_string(),
                e.val_loss.to_string(),
                e.lr.to_string(),
                e.seconds.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Trains with Adam and early stopping, returning the parameters of the epoch
/// with the lowest validation MAE.
pub fn train(
    train_set: &[WindowSample],
    val_set: &[WindowSample],
    params: SegRnnParams,
    cfg: &ModelConfig,
    tc: &TrainConfig,
) -> Result<(SegRnnParams, TrainHistory)> {
    train_with(train_set, val_set, params, cfg, tc, |_| {})
}

/// [`train`] with a callback after every epoch.
pub fn train_with(
    train_set: &[WindowSample],
    val_set: &[WindowSample],
    mut params: SegRnnParams,
    cfg: &ModelConfig,
    tc: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<(SegRnnParams, TrainHistory)> {
    cfg.validate()?;
    tc.validate()?;
    params.check(cfg)?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::config(format!(
            "training needs non-empty splits (train {}, validation {})",
            train_set.len(),
            val_set.len()
        )));
    }

    let mut rng = Rng::new(tc.seed);
    let mut adam = AdamState::new(&params);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = TrainHistory::default();
    let mut best: Option<(Real, SegRnnParams)> = None;
    let mut stale = 0;

    for epoch in 1..=tc.epochs {
        let start = Instant::now();
        let lr = lr_at(epoch, tc);
        rng.shuffle(&mut order);
        let mut loss_sum = 0.0;
        for idx in order.chunks(tc.batch_size) {
            let batch: Vec<&WindowSample> = idx.iter().map(|&i| &train_set[i]).collect();
            let (loss, mut grads) = compute_gradients(&batch, &params, cfg, Mode::Train, &mut rng)?;
            if let Some(c) = tc.clip_norm {
                let norm = grads.global_norm();
                if norm > c as Real {
                    grads.scale(c as Real / norm);
                }
            }
            adam_step(&mut params, &grads, &mut adam, lr as Real)?;
            loss_sum += loss * batch.len() as Real;
        }
        let val = evaluate(val_set, &params, cfg)?;
        let record = EpochRecord {
            epoch,
            train_loss: loss_sum / train_set.len() as Real,
            val_loss: val.mae,
            val_mse: val.mse,
            lr,
            seconds: start.elapsed().as_secs_f64(),
        };
        on_epoch(&record);
        history.epochs.push(record);

        if best.as_ref().map_or(true, |(b, _)| val.mae < *b) {
            best = Some((val.mae, params.clone()));
            history.best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if stale >= tc.patience {
                history.stopped_early = epoch < tc.epochs;
                break;
            }
        }
    }
    let (_, best_params) = best.expect("at least one epoch");
    Ok((best_params, history))
}
