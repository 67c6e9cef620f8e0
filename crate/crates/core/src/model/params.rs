use crate::cells::CellParams;
use crate::error::{Error, Result};
use crate::numerics::{init_uniform, Matrix, Real, Rng};

use super::ModelConfig;

/// Every learnable tensor of the model.
///
/// Linear layers are stored `(out, in)`: the projection maps a segment of
/// `w` values to `d`, the prediction head maps `d` back to `w`.
#[derive(Clone, Debug, PartialEq)]
pub struct SegRnnParams {
    pub projection_weight: Matrix,
    pub projection_bias: Matrix,
    pub cell: CellParams,
    /// `m x d/2`, one row per decoded segment. Absent when relative PE is disabled.
    pub relative_pe: Option<Matrix>,
    /// `C x d/2`, one row per channel. Absent when channel PE is disabled.
    pub channel_pe: Option<Matrix>,
    pub prediction_weight: Matrix,
    pub prediction_bias: Matrix,
}

impl SegRnnParams {
    pub fn zeros(cfg: &ModelConfig) -> Self {
        let d = cfg.hidden_dim;
        let w = cfg.seg_len;
        SegRnnParams {
            projection_weight: Matrix::zeros(d, w),
            projection_bias: Matrix::zeros(1, d),
            cell: CellParams::zeros(cfg.cell, d, d),
            relative_pe: cfg
                .use_relative_pe
                .then(|| Matrix::zeros(cfg.m_segments(), cfg.half_dim())),
            channel_pe: cfg
                .use_channel_pe
                .then(|| Matrix::zeros(cfg.num_channels, cfg.half_dim())),
            prediction_weight: Matrix::zeros(w, d),
            prediction_bias: Matrix::zeros(1, w),
        }
    }

    /// Fan-in uniform weights and embedding tables, zero biases.
    pub fn init(cfg: &ModelConfig, rng: &mut Rng) -> Result<Self> {
        cfg.validate()?;
        let d = cfg.hidden_dim;
        let w = cfg.seg_len;
        let mut p = Self::zeros(cfg);
        p.projection_weight = init_uniform(d, w, rng);
        p.cell = CellParams::init(cfg.cell, d, d, rng);
        if let Some(rp) = p.relative_pe.as_mut() {
            *rp = init_uniform(rp.rows(), rp.cols(), rng);
        }
        if let Some(cp) = p.channel_pe.as_mut() {
            *cp = init_uniform(cp.rows(), cp.cols(), rng);
        }
        p.prediction_weight = init_uniform(w, d, rng);
        Ok(p)
    }

    pub fn zeros_like(&self) -> Self {
        let mut out = self.clone();
        for t in out.tensors_mut() {
            t.fill(0.0);
        }
        out
    }

    /// Named tensors in a fixed order shared by the optimizer, checkpoints and gradient checks.
    pub fn tensors(&self) -> Vec<(String, &Matrix)> {
        let mut out = vec![
            ("projection.weight".to_string(), &self.projection_weight),
            ("projection.bias".to_string(), &self.projection_bias),
        ];
        for (name, m) in self.cell.tensors() {
            out.push((format!("cell.{name}"), m));
        }
        if let Some(rp) = &self.relative_pe {
            out.push(("pe.relative".to_string(), rp));
        }
        if let Some(cp) = &self.channel_pe {
            out.push(("pe.channel".to_string(), cp));
        }
        out.push(("prediction.weight".to_string(), &self.prediction_weight));
        out.push(("prediction.bias".to_string(), &self.prediction_bias));
        out
    }

    /// Mutable view in the same order as [`tensors`](Self::tensors).
    pub fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        let mut out = vec![&mut self.projection_weight, &mut self.projection_bias];
        out.extend(self.cell.tensors_mut());
        if let Some(rp) = self.relative_pe.as_mut() {
            out.push(rp);
        }
        if let Some(cp) = self.channel_pe.as_mut() {
            out.push(cp);
        }
        out.push(&mut self.prediction_weight);
        out.push(&mut self.prediction_bias);
        out
    }

    /// Checks that every tensor has the shape `cfg` implies and holds finite values.
    pub fn check(&self, cfg: &ModelConfig) -> Result<()> {
        let expected = Self::zeros(cfg);
        let ours = self.tensors();
        let theirs = expected.tensors();
        if self.cell.kind != cfg.cell || ours.len() != theirs.len() {
            return Err(Error::Consistency(format!(
                "parameter set ({} {} tensors) does not match configuration ({} {} tensors)",
                self.cell.kind,
                ours.len(),
                cfg.cell,
                theirs.len()
            )));
        }
        for ((name, a), (_, b)) in ours.iter().zip(&theirs) {
            if a.shape() != b.shape() {
                return Err(Error::Consistency(format!(
                    "tensor {name} has shape {:?}, expected {:?}",
                    a.shape(),
                    b.shape()
                )));
            }
            if !a.is_finite() {
                return Err(Error::Consistency(format!(
                    "tensor {name} holds non-finite values"
                )));
            }
        }
        Ok(())
    }

    /// Euclidean norm over all tensors together.
    pub fn global_norm(&self) -> Real {
        self.tensors()
            .iter()
            .flat_map(|(_, m)| m.as_slice())
            .map(|v| v * v)
            .sum::<Real>()
            .sqrt()
    }

    pub fn add_assign(&mut self, other: &SegRnnParams) {
        for (a, (_, b)) in self.tensors_mut().into_iter().zip(other.tensors()) {
            a.add_assign(b);
        }
    }

    pub fn scale(&mut self, factor: Real) {
        for t in self.tensors_mut() {
            t.scale(factor);
        }
    }
}

/// Total number of learnable scalars.
pub fn count_parameters(params: &SegRnnParams) -> usize {
    params.tensors().iter().map(|(_, m)| m.len()).sum()
}

/// Parameter count implied by a configuration, without allocating the tensors.
pub fn count_parameters_for(cfg: &ModelConfig) -> usize {
    let d = cfg.hidden_dim;
    let w = cfg.seg_len;
    let projection = d * w + d;
    let cell = cfg.cell.gate_count() * (d * 2 * d + d);
    let rp = if cfg.use_relative_pe {
        cfg.m_segments() * cfg.half_dim()
    } else {
        0
    };
    let cp = if cfg.use_channel_pe {
        cfg.num_channels * cfg.half_dim()
    } else {
        0
    };
    let prediction = w * d + w;
    projection + cell + rp + cp + prediction
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::CellKind;

    #[test]
    fn hand_counted_tiny_model() {
        let mut cfg = ModelConfig::new(1, 1, 1, 2, 1);
        cfg.use_channel_pe = false;
        let p = SegRnnParams::zeros(&cfg);
        // projection 2+2, gru 3*(2*4+2), rp 1*1, prediction 2+1
        assert_eq!(count_parameters(&p), 38);
        assert_eq!(count_parameters_for(&cfg), 38);
    }

    #[test]
    fn full_scale_count() {
        let cfg = ModelConfig::new(720, 192, 48, 512, 7);
        let n = count_parameters_for(&cfg);
        assert_eq!(n, 1_626_928);
        assert!((n as f64 - 1.63e6).abs() / 1.63e6 <= 0.02);
    }

    #[test]
    fn channel_table_grows_linearly() {
        let a = ModelConfig::new(96, 96, 12, 16, 3);
        let b = ModelConfig::new(96, 96, 12, 16, 6);
        assert_eq!(count_parameters_for(&b) - count_parameters_for(&a), 3 * 8);
    }

    #[test]
    fn init_and_check() {
        let mut cfg = ModelConfig::new(16, 8, 4, 6, 2);
        cfg.cell = CellKind::Lstm;
        let p = SegRnnParams::init(&cfg, &mut Rng::new(3)).unwrap();
        p.check(&cfg).unwrap();
        assert_eq!(count_parameters(&p), count_parameters_for(&cfg));
        assert!(p.projection_bias.max_abs() == 0.0 && p.prediction_weight.max_abs() > 0.0);

        let mut other = cfg.clone();
        other.hidden_dim = 8;
        assert!(p.check(&other).is_err());
        other = cfg.clone();
        other.use_relative_pe = false;
        assert!(p.check(&other).is_err());
    }

    #[test]
    fn tensor_views_align() {
        let cfg = ModelConfig::new(16, 8, 4, 6, 2);
        let mut p = SegRnnParams::init(&cfg, &mut Rng::new(4)).unwrap();
        let shapes: Vec<_> = p.tensors().iter().map(|(_, m)| m.shape()).collect();
        let shapes_mut: Vec<_> = p.tensors_mut().iter().map(|m| m.shape()).collect();
        assert_eq!(shapes, shapes_mut);
    }
}
