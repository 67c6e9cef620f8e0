use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Optimization hyperparameters. Dropout lives in the model configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub base_lr: f64,
    pub lr_decay: f64,
    /// Last epoch trained at the base rate.
    pub decay_start_epoch: usize,
    pub patience: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub clip_norm: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            base_lr: 1e-3,
            lr_decay: 0.8,
            decay_start_epoch: 3,
            patience: 10,
            batch_size: 256,
            seed: 0,
            clip_norm: None,
        }
    }
}

impl TrainConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.epochs == 0 {
            v.push("epochs must be positive".to_string());
        }
        if !(self.base_lr > 0.0 && self.base_lr.is_finite()) {
            v.push(format!("learning rate {} must be positive", self.base_lr));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            v.push(format!("lr decay {} must lie in (0, 1]", self.lr_decay));
        }
        if self.decay_start_epoch == 0 {
            v.push("decay start epoch must be positive".to_string());
        }
        if self.patience == 0 || self.patience > self.epochs {
            v.push(format!(
                "patience {} must lie in [1, epochs = {}]",
                self.patience, self.epochs
            ));
        }
        if self.batch_size == 0 {
            v.push("batch size must be positive".to_string());
        }
        if let Some(c) = self.clip_norm {
            if c.is_nan() || c <= 0.0 {
                v.push(format!("clip norm {c} must be positive"));
            }
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

/// Learning rate for a 1-based epoch: flat through `decay_start_epoch`, then geometric decay.
pub fn lr_at(epoch: usize, tc: &TrainConfig) -> f64 {
    let extra = epoch.saturating_sub(tc.decay_start_epoch);
    tc.base_lr * tc.lr_decay.powi(extra as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_values() {
        let tc = TrainConfig::default();
        for e in 1..=3 {
            assert_eq!(lr_at(e, &tc), 0.001);
        }
        assert!((lr_at(4, &tc) - 0.0008).abs() < 1e-15);
        assert!((lr_at(6, &tc) - 0.000512).abs() < 1e-15);
    }

    #[test]
    fn schedule_never_increases() {
        let tc = TrainConfig {
            decay_start_epoch: 5,
            ..TrainConfig::default()
        };
        for e in 1..60 {
            assert!(lr_at(e + 1, &tc) <= lr_at(e, &tc));
        }
        assert_eq!(lr_at(5, &tc), lr_at(1, &tc));
    }

    #[test]
    fn validation_lists_everything() {
        let tc = TrainConfig {
            epochs: 5,
            patience: 6,
            batch_size: 0,
            base_lr: -1.0,
            ..TrainConfig::default()
        };
        let v = tc.violations();
        assert_eq!(v.len(), 3, "{v:?}");
        assert!(TrainConfig::default().validate().is_ok());
    }

    #[test]
    fn partial_toml_fills_defaults() {
        let tc: TrainConfig = toml::from_str("epochs = 5\npatience = 2\n").unwrap();
        assert_eq!((tc.epochs, tc.patience, tc.batch_size), (5, 2, 256));
        assert!(toml::from_str::<TrainConfig>("epoch = 5").is_err());
    }
}
