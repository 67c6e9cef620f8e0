use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Real};

fn check_shapes(op: &'static str, pred: &Matrix, target: &Matrix) -> Result<()> {
    if pred.shape() != target.shape() {
        return Err(Error::Shape {
            op,
            left: pred.shape(),
            right: target.shape(),
        });
    }
    Ok(())
}

/// Mean absolute error over every element.
pub fn mae_loss(pred: &Matrix, target: &Matrix) -> Result<Real> {
    check_shapes("mae_loss", pred, target)?;
    Ok(ErrorSums::of(pred, target).mae())
}

/// `scale * sign(pred - target)`, with the sign of zero taken as zero.
pub fn mae_gradient(pred: &Matrix, target: &Matrix, scale: Real) -> Result<Matrix> {
    check_shapes("mae_gradient", pred, target)?;
    Ok(pred.zip_map(target, |p, t| {
        let d = p - t;
        if d > 0.0 {
            scale
        } else if d < 0.0 {
            -scale
        } else {
            0.0
        }
    }))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mse: Real,
    pub mae: Real,
}

pub fn metrics(pred: &Matrix, target: &Matrix) -> Result<Metrics> {
    check_shapes("metrics", pred, target)?;
    Ok(ErrorSums::of(pred, target).metrics())
}

/// Running sums of absolute and squared errors, mergeable across batches.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorSums {
    pub abs: Real,
    pub sq: Real,
    pub count: usize,
}

impl ErrorSums {
    pub fn of(pred: &Matrix, target: &Matrix) -> Self {
        let mut s = ErrorSums::default();
        for (p, t) in pred.as_slice().iter().zip(target.as_slice()) {
            let d = p - t;
            s.abs += d.abs();
            s.sq += d * d;
        }
        s.count = pred.len();
        s
    }

    pub fn merge(&mut self, other: &ErrorSums) {
        self.abs += other.abs;
        self.sq += other.sq;
        self.count += other.count;
    }

    pub fn mae(&self) -> Real {
        if self.count == 0 {
            0.0
        } else {
            self.abs / self.count as Real
        }
    }

    pub fn metrics(&self) -> Metrics {
        let n = self.count.max(1) as Real;
        Metrics {
            mse: self.sq / n,
            mae: self.abs / n,
        }
    }
}
