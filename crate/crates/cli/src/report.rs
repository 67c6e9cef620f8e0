use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use segrnn_core::training::EpochRecord;
use segrnn_core::{Error, Metrics, ModelConfig, Result, TrainConfig};

/// One seeded training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    /// Test-split errors in standardized space.
    pub mse: f64,
    pub mae: f64,
    pub seconds_per_epoch: f64,
    pub inference_seconds: f64,
    pub parameter_count: usize,
    pub best_epoch: usize,
    pub history: Vec<EpochRecord>,
}

impl RunRecord {
    /// Validation MAE of the last epoch trained.
    pub fn final_val_loss(&self) -> Option<f64> {
        self.history.last().map(|e| e.val_loss)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation, zero for a single run.
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len();
        if n == 0 {
            return Summary::default();
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Summary { mean, std }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub runs: usize,
    pub mse: Summary,
    pub mae: Summary,
    pub seconds_per_epoch: Summary,
    pub inference_seconds: Summary,
}

impl Aggregate {
    pub fn from_runs(runs: &[RunRecord]) -> Aggregate {
        let col = |f: fn(&RunRecord) -> f64| Summary::of(&runs.iter().map(f).collect::<Vec<_>>());
        Aggregate {
            runs: runs.len(),
            mse: col(|r| r.mse),
            mae: col(|r| r.mae),
            seconds_per_epoch: col(|r| r.seconds_per_epoch),
            inference_seconds: col(|r| r.inference_seconds),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub dataset: String,
    pub model: ModelConfig,
    pub train: TrainConfig,
    /// Repeat-last-value forecaster on the same test windows.
    pub baseline: Metrics,
    pub runs: Vec<RunRecord>,
    pub aggregate: Aggregate,
}

impl Report {
    pub fn new(
        dataset: String,
        model: ModelConfig,
        train: TrainConfig,
        baseline: Metrics,
        runs: Vec<RunRecord>,
    ) -> Report {
        let aggregate = Aggregate::from_runs(&runs);
        Report {
            dataset,
            model,
            train,
            baseline,
            runs,
            aggregate,
        }
    }

    /// True when the stored aggregate matches one recomputed from the runs.
    pub fn aggregate_consistent(&self, tol: f64) -> bool {
        let fresh = Aggregate::from_runs(&self.runs);
        let close =
            |a: Summary, b: Summary| (a.mean - b.mean).abs() <= tol && (a.std - b.std).abs() <= tol;
        fresh.runs == self.aggregate.runs
            && close(fresh.mse, self.aggregate.mse)
            && close(fresh.mae, self.aggregate.mae)
            && close(fresh.seconds_per_epoch, self.aggregate.seconds_per_epoch)
            && close(fresh.inference_seconds, self.aggregate.inference_seconds)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn read_json(path: &Path) -> Result<Report> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })
    }
}
