use super::step::StepInput;
use super::{affine_backward, CellParams};
use crate::error::Result;
use crate::numerics::Matrix;

#[derive(Clone, Debug)]
pub struct RnnCache {
    /// `[h_prev, x]`
    pub concat: Matrix,
    pub h: Matrix,
}

pub(super) fn forward(p: &CellParams, input: StepInput) -> Result<(Matrix, RnnCache)> {
    let h = input.pre(p, 0)?.map(|v| v.tanh());
    Ok((
        h.clone(),
        RnnCache {
            concat: input.concat,
            h,
        },
    ))
}

pub(super) fn backward(
    p: &CellParams,
    c: &RnnCache,
    dh: &Matrix,
    grads: &mut CellParams,
) -> Result<(Matrix, Matrix)> {
    let hidden = p.hidden_dim;
    let width = hidden + p.input_dim;
    let dpre = dh.zip_map(&c.h, |g, a| g * (1.0 - a * a));
    let mut da = Matrix::zeros(dh.rows(), width);
    affine_backward(
        &dpre,
        &c.concat,
        &p.weights[0],
        &mut grads.weights[0],
        &mut grads.biases[0],
        &mut da,
    )?;
    Ok((da.slice_cols(hidden, width), da.slice_cols(0, hidden)))
}
