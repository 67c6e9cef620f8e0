use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Real};

/// Per-channel z-score statistics, fit on training rows only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<Real>,
    /// Population standard deviation.
    pub std: Vec<Real>,
}

impl Standardizer {
    pub fn num_channels(&self) -> usize {
        self.mean.len()
    }

    fn check(&self, values: &Matrix) -> Result<()> {
        if values.cols() != self.num_channels() {
            return Err(Error::Shape {
                op: "standardize",
                left: values.shape(),
                right: (values.rows(), self.num_channels()),
            });
        }
        Ok(())
    }

    pub fn apply(&self, values: &Matrix) -> Result<Matrix> {
        self.check(values)?;
        let mut out = values.clone();
        for r in 0..out.rows() {
            for (c, v) in out.row_mut(r).iter_mut().enumerate() {
                *v = (*v - self.mean[c]) / self.std[c];
            }
        }
        Ok(out)
    }

    pub fn invert(&self, values: &Matrix) -> Result<Matrix> {
        self.check(values)?;
        let mut out = values.clone();
        for r in 0..out.rows() {
            for (c, v) in out.row_mut(r).iter_mut().enumerate() {
                *v = *v * self.std[c] + self.mean[c];
            }
        }
        Ok(out)
    }
}

/// Fits per-channel mean and population std on `train` (`T x C`).
pub fn fit_standardizer(train: &Matrix) -> Result<Standardizer> {
    let (t, c) = train.shape();
    if t < 2 {
        return Err(Error::Data(format!(
            "standardizer needs at least 2 rows, got {t}"
        )));
    }
    let mut mean = vec![0.0; c];
    for r in 0..t {
        for (m, v) in mean.iter_mut().zip(train.row(r)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= t as Real);
    let mut var = vec![0.0; c];
    for r in 0..t {
        for ((s, v), m) in var.iter_mut().zip(train.row(r)).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std: Vec<Real> = var.iter().map(|s| (s / t as Real).sqrt()).collect();
    if let Some(ch) = std.iter().position(|s| s.is_nan() || *s <= 0.0) {
        return Err(Error::Data(format!(
            "channel {ch} is constant on the training split"
        )));
    }
    Ok(Standardizer { mean, std })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    #[test]
    fn two_point_column() {
        let s = fit_standardizer(&Matrix::from_rows(&[vec![0.0], vec![2.0]]).unwrap()).unwrap();
        assert_eq!((s.mean[0], s.std[0]), (1.0, 1.0));
    }

    #[test]
    fn train_split_becomes_unit_scale() {
        let mut rng = Rng::new(5);
        let data: Vec<Real> = (0..300).map(|_| rng.uniform(-4.0, 9.0)).collect();
        let m = Matrix::from_vec(100, 3, data).unwrap();
        let z = fit_standardizer(&m).unwrap().apply(&m).unwrap();
        let again = fit_standardizer(&z).unwrap();
        for c in 0..3 {
            assert!(again.mean[c].abs() < 1e-12);
            assert!((again.std[c] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn roundtrip() {
        let mut rng = Rng::new(6);
        for _ in 0..20 {
            let data: Vec<Real> = (0..40).map(|_| rng.uniform(-100.0, 100.0)).collect();
            let m = Matrix::from_vec(10, 4, data).unwrap();
            let s = fit_standardizer(&m).unwrap();
            let back = s.invert(&s.apply(&m).unwrap()).unwrap();
            for (a, b) in back.as_slice().iter().zip(m.as_slice()) {
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn constant_channel_is_named() {
        let m = Matrix::from_rows(&[vec![1.0, 3.0], vec![2.0, 3.0], vec![4.0, 3.0]]).unwrap();
        let err = fit_standardizer(&m).unwrap_err().to_string();
        assert!(err.contains("channel 1"), "{err}");
        assert!(fit_standardizer(&Matrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn width_mismatch() {
        let s = fit_standardizer(&Matrix::from_rows(&[vec![0.0], vec![2.0]]).unwrap()).unwrap();
        assert!(s.apply(&Matrix::zeros(2, 2)).is_err());
    }
}
