use crate::error::{Error, Result};
use crate::numerics::{Matrix, Real, Rng};

use super::Mode;

/// Inverted dropout. Eval mode (or rate 0) is the identity.
pub fn dropout(v: &Matrix, rate: f64, mode: Mode, rng: &mut Rng) -> Result<Matrix> {
    Ok(dropout_with_mask(v, rate, mode, rng)?.0)
}

/// Dropout that also returns the scaled mask (`0` or `1/(1-rate)` per entry) for the backward pass.
pub fn dropout_with_mask(
    v: &Matrix,
    rate: f64,
    mode: Mode,
    rng: &mut Rng,
) -> Result<(Matrix, Option<Matrix>)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::config(format!(
            "dropout rate {rate} must lie in [0, 1)"
        )));
    }
    if mode == Mode::Eval || rate == 0.0 {
        return Ok((v.clone(), None));
    }
    let keep = (1.0 / (1.0 - rate)) as Real;
    let mut mask = Matrix::zeros(v.rows(), v.cols());
    for m in mask.as_mut_slice() {
        if !rng.bernoulli(rate) {
            *m = keep;
        }
    }
    Ok((v.hadamard(&mask), Some(mask)))
}
