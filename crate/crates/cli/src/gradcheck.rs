use serde::{Deserialize, Serialize};

use segrnn_core::data::make_windows;
use segrnn_core::training::{generic_params, grad_check, GradCheckReport};
use segrnn_core::{CellKind, DecodeMode, Matrix, ModelConfig, Result, Rng};

/// Extra window positions per check beyond the first, so each check averages
/// over a few windows instead of one.
pub const EXTRA_WINDOWS: usize = 7;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GradCheckCase {
    pub config: ModelConfig,
    pub max_relative_error: f64,
    pub worst: Option<(String, usize)>,
    pub checked: usize,
    pub kinks: usize,
}

/// A random small configuration: look-back up to 16, segment length 2 or 4,
/// hidden size 4 or 8, horizon up to 8, one or two channels, dropout off.
/// `index` cycles through every decode mode and cell kind.
pub fn random_config(index: usize, rng: &mut Rng) -> ModelConfig {
    let mut pick = |n: usize| (rng.next_u64() % n as u64) as usize;
    let w = [2, 4][pick(2)];
    let lookback = w * (1 + pick(16 / w));
    let horizon = w * (1 + pick(8 / w));
    let d = [4, 8][pick(2)];
    let c = 1 + pick(2);
    let mut cfg = ModelConfig::new(lookback, horizon, w, d, c);
    cfg.cell = CellKind::ALL[index % 3];
    cfg.decode_mode = if (index / 3) % 2 == 0 {
        DecodeMode::Pmf
    } else {
        DecodeMode::Rmf
    };
    cfg.dropout_rate = 0.0;
    cfg
}

/// Gradient check of one configuration on random data.
pub fn check_config(cfg: &ModelConfig, rng: &mut Rng, eps: f64) -> Result<GradCheckReport> {
    let params = generic_params(cfg, rng)?;
    let t = cfg.lookback + cfg.horizon + EXTRA_WINDOWS;
    let c = cfg.num_channels;
    let values = Matrix::from_vec(t, c, (0..t * c).map(|_| rng.uniform(-1.0, 1.0)).collect())?;
    let samples = make_windows(&values, cfg.lookback, cfg.horizon, 1)?;
    grad_check(&params, &samples, cfg, eps)
}

/// `count` random configurations checked with step `eps`.
pub fn gradcheck_suite(count: usize, seed: u64, eps: f64) -> Result<Vec<GradCheckCase>> {
    let mut rng = Rng::new(seed);
    (0..count)
        .map(|i| {
            let cfg = random_config(i, &mut rng);
            let r = check_config(&cfg, &mut rng, eps)?;
            Ok(GradCheckCase {
                config: cfg,
                max_relative_error: r.max_relative_error,
                worst: r.worst,
                checked: r.checked,
                kinks: r.kinks,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn configs_stay_in_range_and_cover_all_variants() {
        let mut rng = Rng::new(1);
        let cfgs: Vec<_> = (0..60).map(|i| random_config(i, &mut rng)).collect();
        for c in &cfgs {
            assert!(c.validate().is_ok());
            assert!(c.lookback <= 16 && c.horizon <= 8 && c.num_channels <= 2);
            assert!([2, 4].contains(&c.seg_len) && [4, 8].contains(&c.hidden_dim));
        }
        for cell in CellKind::ALL {
            for mode in [DecodeMode::Pmf, DecodeMode::Rmf] {
                assert!(cfgs[..6]
                    .iter()
                    .any(|c| c.cell == cell && c.decode_mode == mode));
            }
        }
    }
}
