use crate::cells::{cell_backward_into, sequence_backward_into, State};
use crate::error::{Error, Result};
use crate::numerics::{gemm, Matrix, Trans};

use super::forward::{DecodeCache, ForwardCache, ParallelCache, RecurrentStep};
use super::{ModelConfig, SegRnnParams};

/// Gradients of a scalar loss with respect to every parameter, given `dy = dloss/dprediction`
/// (`batch x H`) and the cache of the forward pass that produced the prediction.
///
/// The instance-normalization anchor does not depend on the parameters, so `dy` flows
/// unchanged onto the normalized output.
pub fn backward(
    params: &SegRnnParams,
    cfg: &ModelConfig,
    cache: &ForwardCache,
    dy: &Matrix,
) -> Result<SegRnnParams> {
    let batch = cache.anchors.len();
    if dy.shape() != (batch, cfg.horizon) {
        return Err(Error::Shape {
            op: "backward",
            left: dy.shape(),
            right: (batch, cfg.horizon),
        });
    }
    let mut grads = params.zeros_like();
    let (d_state, d_first_input) = match &cache.decode {
        DecodeCache::Parallel(pc) => (parallel_backward(params, cfg, pc, dy, &mut grads)?, None),
        DecodeCache::Recurrent(steps) => {
            let (ds, dfirst) = recurrent_backward(params, cfg, steps, dy, &mut grads)?;
            (ds, Some(dfirst))
        }
    };

    let enc = &cache.encode;
    let (mut d_inputs, _) =
        sequence_backward_into(&params.cell, &enc.steps, &d_state, &mut grads.cell)?;
    if let Some(extra) = d_first_input {
        d_inputs
            .last_mut()
            .expect("at least one segment")
            .add_assign(&extra);
    }
    for ((d_in, pre), seg) in d_inputs.iter().zip(&enc.projected_pre).zip(&enc.segments) {
        let d_pre = relu_backward(d_in, pre);
        gemm(
            1.0,
            &d_pre,
            Trans::Yes,
            seg,
            Trans::No,
            1.0,
            &mut grads.projection_weight,
        )?;
        grads.projection_bias.add_assign(&d_pre.column_sums());
    }
    Ok(grads)
}

fn relu_backward(upstream: &Matrix, pre: &Matrix) -> Matrix {
    upstream.zip_map(pre, |g, p| if p > 0.0 { g } else { 0.0 })
}

fn zero_upstream(cfg: &ModelConfig, rows: usize) -> Option<Matrix> {
    cfg.cell
        .has_cell_state()
        .then(|| Matrix::zeros(rows, cfg.hidden_dim))
}

/// Returns the gradient on the encoder's final state.
fn parallel_backward(
    params: &SegRnnParams,
    cfg: &ModelConfig,
    pc: &ParallelCache,
    dy: &Matrix,
    grads: &mut SegRnnParams,
) -> Result<State> {
    let b = dy.rows();
    let m = cfg.m_segments();
    let w = cfg.seg_len;
    let half = cfg.half_dim();

    let mut dyw = Matrix::zeros(m * b, w);
    for j in 0..m {
        for i in 0..b {
            dyw.row_mut(j * b + i)
                .copy_from_slice(&dy.row(i)[j * w..(j + 1) * w]);
        }
    }
    let mut d_dropped = Matrix::zeros(m * b, cfg.hidden_dim);
    crate::cells::affine_backward(
        &dyw,
        &pc.dropped,
        &params.prediction_weight,
        &mut grads.prediction_weight,
        &mut grads.prediction_bias,
        &mut d_dropped,
    )?;
    let dh = match &pc.mask {
        Some(mask) => d_dropped.hadamard(mask),
        None => d_dropped,
    };
    let d_out = State {
        h: dh,
        c: zero_upstream(cfg, m * b),
    };
    let (d_pe, d_prev) = cell_backward_into(&params.cell, &pc.step, &d_out, &mut grads.cell)?;

    for j in 0..m {
        for (i, &ch) in pc.channels.iter().enumerate() {
            let row = d_pe.row(j * b + i);
            if let Some(rp) = grads.relative_pe.as_mut() {
                for (a, g) in rp.row_mut(j).iter_mut().zip(&row[..half]) {
                    *a += g;
                }
            }
            if let Some(cp) = grads.channel_pe.as_mut() {
                for (a, g) in cp.row_mut(ch).iter_mut().zip(&row[half..]) {
                    *a += g;
                }
            }
        }
    }
    Ok(d_prev.sum_row_blocks(m))
}

/// Returns the gradient on the encoder's final state and on the first decoder input.
fn recurrent_backward(
    params: &SegRnnParams,
    cfg: &ModelConfig,
    steps: &[RecurrentStep],
    dy: &Matrix,
    grads: &mut SegRnnParams,
) -> Result<(State, Matrix)> {
    let b = dy.rows();
    let w = cfg.seg_len;
    let d = cfg.hidden_dim;
    let mut d_state = State {
        h: Matrix::zeros(b, d),
        c: zero_upstream(cfg, b),
    };
    let mut d_next_input: Option<Matrix> = None;

    for j in (0..steps.len()).rev() {
        let mut d_pred = dy.slice_cols(j * w, (j + 1) * w);
        if let Some(d_in) = d_next_input.take() {
            let (pred, pre) = steps[j + 1]
                .fed_back
                .as_ref()
                .ok_or_else(|| Error::Consistency("missing fed-back segment".into()))?;
            let d_pre = relu_backward(&d_in, pre);
            crate::cells::affine_backward(
                &d_pre,
                pred,
                &params.projection_weight,
                &mut grads.projection_weight,
                &mut grads.projection_bias,
                &mut d_pred,
            )?;
        }
        let step = &steps[j];
        let mut d_dropped = Matrix::zeros(b, d);
        crate::cells::affine_backward(
            &d_pred,
            &step.dropped,
            &params.prediction_weight,
            &mut grads.prediction_weight,
            &mut grads.prediction_bias,
            &mut d_dropped,
        )?;
        let mut dh = match &step.mask {
            Some(mask) => d_dropped.hadamard(mask),
            None => d_dropped,
        };
        dh.add_assign(&d_state.h);
        let d_out = State {
            h: dh,
            c: d_state.c.take(),
        };
        let (d_in, d_prev) = cell_backward_into(&params.cell, &step.cell, &d_out, &mut grads.cell)?;
        d_next_input = Some(d_in);
        d_state = d_prev;
    }
    let d_first = d_next_input.ok_or_else(|| Error::Consistency("no decoder steps".into()))?;
    Ok((d_state, d_first))
}
