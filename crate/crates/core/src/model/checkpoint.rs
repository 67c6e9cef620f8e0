//! Versioned JSON checkpoints: the model configuration plus every named tensor.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Real};

use super::{ModelConfig, SegRnnParams};

pub const FORMAT: &str = "segrnn-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct TensorRecord {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Real>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub config: ModelConfig,
    pub tensors: Vec<TensorRecord>,
}

impl Checkpoint {
    pub fn new(cfg: &ModelConfig, params: &SegRnnParams) -> Self {
        Checkpoint {
            format: FORMAT.to_string(),
            version: VERSION,
            config: cfg.clone(),
            tensors: params
                .tensors()
                .into_iter()
                .map(|(name, m)| TensorRecord {
                    name,
                    rows: m.rows(),
                    cols: m.cols(),
                    data: m.as_slice().to_vec(),
                })
                .collect(),
        }
    }

    /// Rebuilds the parameters, validating the configuration and every tensor shape.
    pub fn into_params(self) -> Result<(ModelConfig, SegRnnParams)> {
        if self.format != FORMAT || self.version != VERSION {
            return Err(Error::Consistency(format!(
                "unsupported checkpoint {:?} version {}",
                self.format, self.version
            )));
        }
        self.config.validate()?;
        let mut params = SegRnnParams::zeros(&self.config);
        let names: Vec<String> = params.tensors().into_iter().map(|(n, _)| n).collect();
        if names.len() != self.tensors.len() {
            return Err(Error::Consistency(format!(
                "checkpoint holds {} tensors, configuration needs {}",
                self.tensors.len(),
                names.len()
            )));
        }
        for (slot, name) in params.tensors_mut().into_iter().zip(&names) {
            let rec = self
                .tensors
                .iter()
                .find(|t| &t.name == name)
                .ok_or_else(|| {
                    Error::Consistency(format!("checkpoint is missing tensor {name}"))
                })?;
            if (rec.rows, rec.cols) != slot.shape() {
                return Err(Error::Consistency(format!(
                    "tensor {name} is {}x{}, configuration needs {:?}",
                    rec.rows,
                    rec.cols,
                    slot.shape()
                )));
            }
            *slot = Matrix::from_vec(rec.rows, rec.cols, rec.data.clone())?;
        }
        params.check(&self.config)?;
        Ok((self.config, params))
    }
}

pub fn save(path: &Path, cfg: &ModelConfig, params: &SegRnnParams) -> Result<()> {
    let json = serde_json::to_string(&Checkpoint::new(cfg, params)).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    fs::write(path, json).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load(path: &Path) -> Result<(ModelConfig, SegRnnParams)> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let ckpt: Checkpoint = serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    ckpt.into_params()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::CellKind;
    use crate::numerics::Rng;

    #[test]
    fn roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let mut cfg = ModelConfig::new(16, 8, 4, 6, 3);
        cfg.cell = CellKind::Lstm;
        let params = SegRnnParams::init(&cfg, &mut Rng::new(1)).unwrap();
        save(&path, &cfg, &params).unwrap();
        let (cfg2, params2) = load(&path).unwrap();
        assert_eq!(cfg, cfg2);
        assert_eq!(params, params2);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let cfg = ModelConfig::new(16, 8, 4, 6, 2);
        let params = SegRnnParams::init(&cfg, &mut Rng::new(1)).unwrap();
        let mut ckpt = Checkpoint::new(&cfg, &params);
        ckpt.tensors[0].rows += 1;
        assert!(matches!(ckpt.into_params(), Err(Error::Consistency(_))));

        let mut ckpt = Checkpoint::new(&cfg, &params);
        ckpt.tensors.pop();
        assert!(ckpt.into_params().is_err());

        let mut ckpt = Checkpoint::new(&cfg, &params);
        ckpt.config.hidden_dim = 5;
        assert!(matches!(ckpt.into_params(), Err(Error::Config(_))));
    }

    #[test]
    fn missing_file_is_io() {
        let err = load(Path::new("/nonexistent/ckpt.json")).unwrap_err();
        assert!(err.is_io());
    }
}
