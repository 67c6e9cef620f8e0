use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use segrnn_core::data::{load_csv, DatasetRegistry, SplitSpec};
use segrnn_core::{CellKind, DecodeMode, Error, ModelConfig, Result, TrainConfig};

/// Everything needed to reproduce one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub dataset: String,
    pub model: ModelConfig,
    pub train: TrainConfig,
    /// One training run per seed.
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub data_dir: PathBuf,
    pub registry: Option<PathBuf>,
    /// Keep only the first rows of the series.
    pub max_rows: Option<usize>,
    /// Batch size and repeat count of the inference timing.
    pub timing_batch: usize,
    pub timing_repeats: usize,
}

impl ExperimentSpec {
    pub fn repeats(&self) -> usize {
        self.seeds.len()
    }

    pub fn registry(&self) -> Result<DatasetRegistry> {
        match &self.registry {
            Some(path) => DatasetRegistry::load(path),
            None => Ok(DatasetRegistry::builtin(&self.data_dir)),
        }
    }

    pub fn dataset_path(&self) -> Result<PathBuf> {
        self.registry()?.resolve(&self.dataset)
    }

    pub fn split(&self) -> Result<SplitSpec> {
        self.registry()?.get(&self.dataset)?.split_spec()
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = self.model.violations();
        v.extend(self.train.violations());
        if self.seeds.is_empty() {
            v.push("at least one repeat is required".to_string());
        }
        if self.timing_batch == 0 || self.timing_repeats == 0 {
            v.push("timing batch and repeats must be positive".to_string());
        }
        if self.dataset.is_empty() {
            v.push("dataset name is empty".to_string());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v.join("; ")))
        }
    }
}

/// A partial experiment description. Config files and command-line flags each
/// produce one; later layers override earlier ones field by field.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpecLayer {
    pub dataset: Option<String>,
    pub lookback: Option<usize>,
    pub horizon: Option<usize>,
    pub seg_len: Option<usize>,
    pub hidden_dim: Option<usize>,
    pub cell: Option<CellKind>,
    pub dropout: Option<f64>,
    pub decode_mode: Option<DecodeMode>,
    pub relative_pe: Option<bool>,
    pub channel_pe: Option<bool>,
    pub num_channels: Option<usize>,
    pub epochs: Option<usize>,
    pub patience: Option<usize>,
    pub batch_size: Option<usize>,
    pub lr: Option<f64>,
    pub lr_decay: Option<f64>,
    pub decay_start_epoch: Option<usize>,
    pub clip_norm: Option<f64>,
    pub seed: Option<u64>,
    pub seeds: Option<Vec<u64>>,
    pub repeats: Option<usize>,
    pub out: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
    pub registry: Option<PathBuf>,
    pub max_rows: Option<usize>,
    pub timing_batch: Option<usize>,
    pub timing_repeats: Option<usize>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($f:ident),*) => {
        SpecLayer { $($f: $top.$f.or($base.$f)),* }
    };
}

impl SpecLayer {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })
    }

    /// `top` wins wherever it sets a field.
    pub fn overlay(self, top: SpecLayer) -> SpecLayer {
        let base = self;
        overlay!(
            base,
            top,
            dataset,
            lookback,
            horizon,
            seg_len,
            hidden_dim,
            cell,
            dropout,
            decode_mode,
            relative_pe,
            channel_pe,
            num_channels,
            epochs,
            patience,
            batch_size,
            lr,
            lr_decay,
            decay_start_epoch,
            clip_norm,
            seed,
            seeds,
            repeats,
            out,
            data_dir,
            registry,
            max_rows,
            timing_batch,
            timing_repeats
        )
    }

    pub fn registry(&self) -> Result<DatasetRegistry> {
        match &self.registry {
            Some(path) => DatasetRegistry::load(path),
            None => Ok(DatasetRegistry::builtin(self.data_dir())),
        }
    }

    fn data_dir(&self) -> PathBuf {
        self.data_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("data"))
    }

    /// The model part alone, with defaults for unset fields.
    pub fn model_config(&self, channels: Option<usize>) -> Result<ModelConfig> {
        let num_channels = self
            .num_channels
            .or(channels)
            .ok_or_else(|| Error::Config("channel count unknown".into()))?;
        Ok(ModelConfig {
            lookback: self.lookback.unwrap_or(720),
            horizon: self.horizon.unwrap_or(96),
            seg_len: self.seg_len.unwrap_or(48),
            hidden_dim: self.hidden_dim.unwrap_or(512),
            cell: self.cell.unwrap_or_default(),
            dropout_rate: self.dropout.unwrap_or(0.5),
            use_relative_pe: self.relative_pe.unwrap_or(true),
            use_channel_pe: self.channel_pe.unwrap_or(num_channels > 1),
            num_channels,
            decode_mode: self.decode_mode.unwrap_or_default(),
        })
    }

    /// [`resolve`](Self::resolve), taking the channel count from the dataset
    /// file unless the layer fixes it.
    pub fn resolve_from_data(&self) -> Result<ExperimentSpec> {
        let channels = match (self.num_channels, &self.dataset) {
            (Some(c), _) => Some(c),
            (None, Some(name)) => Some(load_csv(&self.registry()?.resolve(name)?)?.num_channels()),
            (None, None) => None,
        };
        self.resolve(channels)
    }

    /// Fills unset fields with defaults. `channels` is the dataset's channel
    /// count, used when the layer does not fix one.
    pub fn resolve(&self, channels: Option<usize>) -> Result<ExperimentSpec> {
        let dataset = self
            .dataset
            .clone()
            .ok_or_else(|| Error::Config("no dataset given".into()))?;
        let model = self.model_config(channels)?;
        let d = TrainConfig::default();
        let seed = self.seed.unwrap_or(d.seed);
        let train = TrainConfig {
            epochs: self.epochs.unwrap_or(d.epochs),
            base_lr: self.lr.unwrap_or(d.base_lr),
            lr_decay: self.lr_decay.unwrap_or(d.lr_decay),
            decay_start_epoch: self.decay_start_epoch.unwrap_or(d.decay_start_epoch),
            patience: self.patience.unwrap_or(d.patience),
            batch_size: self.batch_size.unwrap_or(d.batch_size),
            seed,
            clip_norm: self.clip_norm.or(d.clip_norm),
        };
        let seeds = match (&self.seeds, self.repeats) {
            (Some(s), Some(r)) if s.len() != r => {
                return Err(Error::Config(format!(
                    "{} seeds given but repeats is {r}",
                    s.len()
                )))
            }
            (Some(s), _) => s.clone(),
            (None, r) => (0..r.unwrap_or(1) as u64).map(|i| seed + i).collect(),
        };
        let spec = ExperimentSpec {
            dataset,
            model,
            train,
            seeds,
            out: self.out.clone().unwrap_or_else(|| PathBuf::from("runs")),
            data_dir: self.data_dir(),
            registry: self.registry.clone(),
            max_rows: self.max_rows,
            timing_batch: self.timing_batch.unwrap_or(256),
            timing_repeats: self.timing_repeats.unwrap_or(10),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(text: &str) -> SpecLayer {
        toml::from_str(text).unwrap()
    }

    #[test]
    fn later_layers_win() {
        let file = layer("dataset = \"ETTh1\"\nlookback = 336\nseg_len = 24\n");
        let flags = SpecLayer {
            seg_len: Some(48),
            ..SpecLayer::default()
        };
        let spec = file.overlay(flags).resolve(Some(7)).unwrap();
        assert_eq!((spec.model.lookback, spec.model.seg_len), (336, 48));
        assert_eq!(spec.model.horizon, 96);
        assert!(spec.model.use_channel_pe);
    }

    #[test]
    fn seeds_and_repeats() {
        let s = layer("dataset = \"x\"\nseed = 10\nrepeats = 3\nlookback = 96\n")
            .resolve(Some(1))
            .unwrap();
        assert_eq!(s.seeds, [10, 11, 12]);
        assert!(!s.model.use_channel_pe);
        let s = layer("dataset = \"x\"\nseeds = [4, 4]\nlookback = 96\n")
            .resolve(Some(1))
            .unwrap();
        assert_eq!(s.seeds, [4, 4]);
        assert!(layer("dataset = \"x\"\nseeds = [4]\nrepeats = 2\n")
            .resolve(Some(1))
            .is_err());
    }

    #[test]
    fn all_violations_reported() {
        let err = layer("dataset = \"x\"\nlookback = 100\nhidden_dim = 7\nbatch_size = 0\n")
            .resolve(Some(2))
            .unwrap_err()
            .to_string();
        assert!(
            err.contains("100") && err.contains("7") && err.contains("batch"),
            "{err}"
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<SpecLayer>("lookbak = 3").is_err());
        assert!(SpecLayer::default().resolve(Some(1)).is_err());
    }
}
