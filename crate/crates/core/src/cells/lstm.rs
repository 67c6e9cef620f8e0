use super::step::StepInput;
use super::{affine_backward, CellParams, State};
use crate::error::Result;
use crate::numerics::{sigmoid, Matrix};

const INPUT: usize = 0;
const FORGET: usize = 1;
const CELL: usize = 2;
const OUTPUT: usize = 3;

#[derive(Clone, Debug)]
pub struct LstmCache {
    /// `[h_prev, x]`
    pub concat: Matrix,
    pub c_prev: Matrix,
    pub i: Matrix,
    pub f: Matrix,
    pub g: Matrix,
    pub o: Matrix,
    /// `tanh(c)`
    pub tanh_c: Matrix,
}

pub(super) fn forward(
    p: &CellParams,
    input: StepInput,
    c_prev: &Matrix,
) -> Result<(State, LstmCache)> {
    let c_prev = input.expand_state(c_prev);
    let i = input.pre(p, INPUT)?.map(sigmoid);
    let f = input.pre(p, FORGET)?.map(sigmoid);
    let g = input.pre(p, CELL)?.map(|v| v.tanh());
    let o = input.pre(p, OUTPUT)?.map(sigmoid);

    let c = f.hadamard(&c_prev).zip_map(&i.hadamard(&g), |a, b| a + b);
    let tanh_c = c.map(|v| v.tanh());
    let h = o.hadamard(&tanh_c);
    Ok((
        State { h, c: Some(c) },
        LstmCache {
            concat: input.concat,
            c_prev,
            i,
            f,
            g,
            o,
            tanh_c,
        },
    ))
}

pub(super) fn backward(
    p: &CellParams,
    c: &LstmCache,
    dh: &Matrix,
    dc: &Matrix,
    grads: &mut CellParams,
) -> Result<(Matrix, State)> {
    let hidden = p.hidden_dim;
    let width = hidden + p.input_dim;

    let mut dc_total = dh
        .hadamard(&c.o)
        .zip_map(&c.tanh_c, |g, t| g * (1.0 - t * t));
    dc_total.add_assign(dc);
    let do_pre = dh
        .hadamard(&c.tanh_c)
        .zip_map(&c.o, |g, s| g * s * (1.0 - s));
    let di_pre = dc_total
        .hadamard(&c.g)
        .zip_map(&c.i, |g, s| g * s * (1.0 - s));
    let dg_pre = dc_total
        .hadamard(&c.i)
        .zip_map(&c.g, |g, t| g * (1.0 - t * t));
    let df_pre = dc_total
        .hadamard(&c.c_prev)
        .zip_map(&c.f, |g, s| g * s * (1.0 - s));
    let dc_prev = dc_total.hadamard(&c.f);

    let mut da = Matrix::zeros(dh.rows(), width);
    for (gate, dpre) in [
        (INPUT, &di_pre),
        (FORGET, &df_pre),
        (CELL, &dg_pre),
        (OUTPUT, &do_pre),
    ] {
        affine_backward(
            dpre,
            &c.concat,
            &p.weights[gate],
            &mut grads.weights[gate],
            &mut grads.biases[gate],
            &mut da,
        )?;
    }
    Ok((
        da.slice_cols(hidden, width),
        State {
            h: da.slice_cols(0, hidden),
            c: Some(dc_prev),
        },
    ))
}
