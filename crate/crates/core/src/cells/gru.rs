use super::step::StepInput;
use super::{affine_backward, CellParams};
use crate::error::Result;
use crate::numerics::{sigmoid, Matrix};

const UPDATE: usize = 0;
const RESET: usize = 1;
const CANDIDATE: usize = 2;

#[derive(Clone, Debug)]
pub struct GruCache {
    pub h_prev: Matrix,
    /// `[h_prev, x]`
    pub concat: Matrix,
    /// `[r * h_prev, x]`
    pub concat_reset: Matrix,
    pub z: Matrix,
    pub r: Matrix,
    pub candidate: Matrix,
}

pub(super) fn forward(p: &CellParams, input: StepInput) -> Result<(Matrix, GruCache)> {
    let h_prev = input.h_prev();
    let z = input.pre(p, UPDATE)?.map(sigmoid);
    let r = input.pre(p, RESET)?.map(sigmoid);
    let (concat_reset, candidate) = input.pre_with_state(p, CANDIDATE, &r.hadamard(&h_prev))?;
    let candidate = candidate.map(|v| v.tanh());

    let mut h = Matrix::zeros(h_prev.rows(), h_prev.cols());
    for (((o, &zv), &hp), &c) in h
        .as_mut_slice()
        .iter_mut()
        .zip(z.as_slice())
        .zip(h_prev.as_slice())
        .zip(candidate.as_slice())
    {
        *o = (1.0 - zv) * hp + zv * c;
    }
    Ok((
        h,
        GruCache {
            h_prev,
            concat: input.concat,
            concat_reset,
            z,
            r,
            candidate,
        },
    ))
}

pub(super) fn backward(
    p: &CellParams,
    c: &GruCache,
    dh: &Matrix,
    grads: &mut CellParams,
) -> Result<(Matrix, Matrix)> {
    let hidden = p.hidden_dim;
    let width = hidden + p.input_dim;

    let dz = dh.zip_map(&c.candidate.zip_map(&c.h_prev, |a, b| a - b), |g, d| g * d);
    let mut dh_prev = dh.zip_map(&c.z, |g, z| g * (1.0 - z));
    let dcand_pre = dh
        .hadamard(&c.z)
        .zip_map(&c.candidate, |g, a| g * (1.0 - a * a));

    let mut da_reset = Matrix::zeros(dh.rows(), width);
    affine_backward(
        &dcand_pre,
        &c.concat_reset,
        &p.weights[CANDIDATE],
        &mut grads.weights[CANDIDATE],
        &mut grads.biases[CANDIDATE],
        &mut da_reset,
    )?;
    let drh = da_reset.slice_cols(0, hidden);
    let mut dx = da_reset.slice_cols(hidden, width);
    dh_prev.add_assign(&drh.hadamard(&c.r));
    let dr = drh.hadamard(&c.h_prev);

    let dz_pre = dz.zip_map(&c.z, |g, s| g * s * (1.0 - s));
    let dr_pre = dr.zip_map(&c.r, |g, s| g * s * (1.0 - s));
    let mut da = Matrix::zeros(dh.rows(), width);
    affine_backward(
        &dz_pre,
        &c.concat,
        &p.weights[UPDATE],
        &mut grads.weights[UPDATE],
        &mut grads.biases[UPDATE],
        &mut da,
    )?;
    affine_backward(
        &dr_pre,
        &c.concat,
        &p.weights[RESET],
        &mut grads.weights[RESET],
        &mut grads.biases[RESET],
        &mut da,
    )?;
    dh_prev.add_assign(&da.slice_cols(0, hidden));
    dx.add_assign(&da.slice_cols(hidden, width));
    Ok((dx, dh_prev))
}
