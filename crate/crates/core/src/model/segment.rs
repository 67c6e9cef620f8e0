use crate::error::{Error, Result};
use crate::numerics::{Matrix, Real};

/// Splits `x` into `L / w` rows of `w` consecutive values.
pub fn segment_partition(x: &[Real], w: usize) -> Result<Matrix> {
    if w == 0 || x.is_empty() || x.len() % w != 0 {
        return Err(Error::config(format!(
            "series length {} is not divisible by segment length {w}",
            x.len()
        )));
    }
    Matrix::from_vec(x.len() / w, w, x.to_vec())
}
