//! Reference forecasters built from the same pieces as the main model.

use std::borrow::Borrow;

use crate::data::WindowSample;
use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::numerics::Real;
use crate::training::{ErrorSums, Metrics};

/// Repeats the last look-back value across the horizon.
pub fn repeat_last(x: &[Real], horizon: usize) -> Result<Vec<Real>> {
    let last = *x
        .last()
        .ok_or_else(|| Error::Precondition("repeat-last needs a non-empty window".into()))?;
    Ok(vec![last; horizon])
}

/// MSE and MAE of the repeat-last forecaster over a sample set.
pub fn repeat_last_metrics<S: Borrow<WindowSample>>(samples: &[S]) -> Result<Metrics> {
    if samples.is_empty() {
        return Err(Error::Precondition("evaluation on an empty set".into()));
    }
    let mut sums = ErrorSums::default();
    for s in samples {
        let s = s.borrow();
        let pred = repeat_last(&s.x, s.y.len())?;
        for (p, y) in pred.iter().zip(&s.y) {
            let d = p - y;
            sums.abs += d.abs();
            sums.sq += d * d;
        }
        sums.count += s.y.len();
    }
    Ok(sums.metrics())
}

/// The same model iterating one time step per recurrent step.
pub fn pointwise(cfg: &ModelConfig) -> ModelConfig {
    ModelConfig {
        seg_len: 1,
        ..cfg.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repeats_last_value() {
        assert_eq!(repeat_last(&[1.0, 2.0, 5.0], 3).unwrap(), [5.0; 3]);
        assert!(repeat_last(&[], 3).is_err());
    }

    #[test]
    fn metrics_by_hand() {
        let s = WindowSample {
            x: vec![0.0, 1.0],
            y: vec![2.0, 0.0],
            channel: 0,
            origin_t: 0,
        };
        let m = repeat_last_metrics(&[s]).unwrap();
        assert_eq!((m.mse, m.mae), (1.0, 1.0));
    }

    #[test]
    fn pointwise_keeps_everything_else() {
        let cfg = ModelConfig::new(96, 96, 12, 32, 7);
        let p = pointwise(&cfg);
        assert_eq!((p.seg_len, p.n_segments(), p.m_segments()), (1, 96, 96));
        assert_eq!(ModelConfig { seg_len: 12, ..p }, cfg);
        assert!(pointwise(&cfg).validate().is_ok());
    }
}
