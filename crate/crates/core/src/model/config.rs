use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cells::CellKind;
use crate::error::{Error, Result};

/// How the horizon is decoded from the encoder's final state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecodeMode {
    /// Parallel multi-step: every output segment from the same final state plus its positional embedding.
    #[default]
    Pmf,
    /// Recurrent multi-step: each predicted segment is fed back as the next input.
    Rmf,
}

impl fmt::Display for DecodeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecodeMode::Pmf => "pmf",
            DecodeMode::Rmf => "rmf",
        })
    }
}

impl FromStr for DecodeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pmf" => Ok(DecodeMode::Pmf),
            "rmf" => Ok(DecodeMode::Rmf),
            other => Err(Error::config(format!(
                "unknown decode mode {other:?} (expected pmf or rmf)"
            ))),
        }
    }
}

/// Train mode enables dropout; eval mode is deterministic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub lookback: usize,
    pub horizon: usize,
    pub seg_len: usize,
    pub hidden_dim: usize,
    #[serde(default)]
    pub cell: CellKind,
    #[serde(default)]
    pub dropout_rate: f64,
    #[serde(default = "default_true")]
    pub use_relative_pe: bool,
    #[serde(default)]
    pub use_channel_pe: bool,
    pub num_channels: usize,
    #[serde(default)]
    pub decode_mode: DecodeMode,
}

fn default_true() -> bool {
    true
}

impl ModelConfig {
    /// GRU, PMF, relative PE on, channel PE on when there is more than one channel.
    pub fn new(
        lookback: usize,
        horizon: usize,
        seg_len: usize,
        hidden_dim: usize,
        num_channels: usize,
    ) -> Self {
        ModelConfig {
            lookback,
            horizon,
            seg_len,
            hidden_dim,
            cell: CellKind::Gru,
            dropout_rate: 0.0,
            use_relative_pe: true,
            use_channel_pe: num_channels > 1,
            num_channels,
            decode_mode: DecodeMode::Pmf,
        }
    }

    /// Number of encoder segments `L / w`.
    pub fn n_segments(&self) -> usize {
        self.lookback / self.seg_len
    }

    /// Number of decoded segments `H / w`.
    pub fn m_segments(&self) -> usize {
        self.horizon / self.seg_len
    }

    pub fn half_dim(&self) -> usize {
        self.hidden_dim / 2
    }

    /// Every violated invariant, empty when the configuration is usable.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.lookback == 0 {
            v.push("lookback must be positive".to_string());
        }
        if self.horizon == 0 {
            v.push("horizon must be positive".to_string());
        }
        if self.seg_len == 0 {
            v.push("seg_len must be positive".to_string());
        } else {
            if self.lookback % self.seg_len != 0 {
                v.push(format!(
                    "lookback {} is not divisible by seg_len {}",
                    self.lookback, self.seg_len
                ));
            }
            if self.horizon % self.seg_len != 0 {
                v.push(format!(
                    "horizon {} is not divisible by seg_len {}",
                    self.horizon, self.seg_len
                ));
            }
        }
        if self.hidden_dim == 0 || self.hidden_dim % 2 != 0 {
            v.push(format!(
                "hidden_dim {} must be positive and even",
                self.hidden_dim
            ));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            v.push(format!(
                "dropout_rate {} must lie in [0, 1)",
                self.dropout_rate
            ));
        }
        if self.num_channels == 0 {
            v.push("num_channels must be positive".to_string());
        }
        if self.use_channel_pe && self.num_channels == 1 {
            v.push("channel position encoding must be disabled for a single channel".to_string());
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
