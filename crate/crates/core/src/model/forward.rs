use crate::cells::{cell_forward, cell_forward_gathered, sequence_forward, State, StepCache};
use crate::error::{Error, Result};
use crate::numerics::{relu, Matrix, Real, Rng};

use super::dropout::dropout_with_mask;
use super::norm::{denormalize_rows, normalize_rows, NormAnchor};
use super::{DecodeMode, Mode, ModelConfig, SegRnnParams};

/// Intermediates of the segment encoder, one entry per segment.
#[derive(Clone, Debug)]
pub struct EncodeCache {
    /// `batch x w` raw (normalized) segments.
    pub segments: Vec<Matrix>,
    /// `batch x d` projection before the ReLU.
    pub projected_pre: Vec<Matrix>,
    /// `batch x d` projection after the ReLU, i.e. the recurrent inputs.
    pub projected: Vec<Matrix>,
    pub steps: Vec<StepCache>,
}

impl EncodeCache {
    /// Number of recurrent iterations the encoder performed.
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }
}

#[derive(Clone, Debug)]
pub struct ParallelCache {
    pub channels: Vec<usize>,
    /// One cell step over all `m * batch` rows, segment-major.
    pub step: StepCache,
    pub mask: Option<Matrix>,
    pub dropped: Matrix,
}

#[derive(Clone, Debug)]
pub struct RecurrentStep {
    /// For steps after the first: the previous predicted segment and its projection before ReLU.
    pub fed_back: Option<(Matrix, Matrix)>,
    pub cell: StepCache,
    pub mask: Option<Matrix>,
    pub dropped: Matrix,
}

#[derive(Clone, Debug)]
pub enum DecodeCache {
    Parallel(Box<ParallelCache>),
    Recurrent(Vec<RecurrentStep>),
}

/// Everything `backward` needs from one batched forward pass.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    pub anchors: Vec<NormAnchor>,
    pub encode: EncodeCache,
    pub decode: DecodeCache,
}

fn project(segment: &Matrix, params: &SegRnnParams) -> Result<(Matrix, Matrix)> {
    let pre = crate::cells::affine(segment, &params.projection_weight, &params.projection_bias)?;
    let post = pre.map(relu);
    Ok((pre, post))
}

/// Segments, projects and recurrently encodes a batch of normalized windows (`batch x L`).
pub fn encode_batch(
    x_norm: &Matrix,
    params: &SegRnnParams,
    cfg: &ModelConfig,
) -> Result<(State, EncodeCache)> {
    if x_norm.cols() != cfg.lookback {
        return Err(Error::Shape {
            op: "encode",
            left: x_norm.shape(),
            right: (x_norm.rows(), cfg.lookback),
        });
    }
    let w = cfg.seg_len;
    let n = cfg.n_segments();
    let mut cache = EncodeCache {
        segments: Vec::with_capacity(n),
        projected_pre: Vec::with_capacity(n),
        projected: Vec::with_capacity(n),
        steps: Vec::new(),
    };
    for j in 0..n {
        let seg = x_norm.slice_cols(j * w, (j + 1) * w);
        let (pre, post) = project(&seg, params)?;
        cache.segments.push(seg);
        cache.projected_pre.push(pre);
        cache.projected.push(post);
    }
    let h0 = State::zeros(cfg.cell, x_norm.rows(), cfg.hidden_dim);
    let (state, steps) = sequence_forward(&params.cell, &cache.projected, &h0)?;
    cache.steps = steps;
    Ok((state, cache))
}

/// Single-window form of [`encode_batch`].
pub fn encode(
    x_norm: &[Real],
    params: &SegRnnParams,
    cfg: &ModelConfig,
) -> Result<(State, EncodeCache)> {
    encode_batch(&Matrix::row_vector(x_norm), params, cfg)
}

/// Positional embedding of output segment `j` for `channel`: `[rp_j, cp_channel]`.
pub fn build_pe(
    j: usize,
    channel: usize,
    params: &SegRnnParams,
    cfg: &ModelConfig,
) -> Result<Vec<Real>> {
    let m = cfg.m_segments();
    if j >= m {
        return Err(Error::Bounds {
            what: "output segment",
            index: j,
            len: m,
        });
    }
    if channel >= cfg.num_channels {
        return Err(Error::Bounds {
            what: "channel",
            index: channel,
            len: cfg.num_channels,
        });
    }
    let half = cfg.half_dim();
    let mut pe = vec![0.0; cfg.hidden_dim];
    if let Some(rp) = &params.relative_pe {
        pe[..half].copy_from_slice(rp.row(j));
    }
    if let Some(cp) = &params.channel_pe {
        pe[half..].copy_from_slice(cp.row(channel));
    }
    Ok(pe)
}

/// Embeddings for every (segment, sample) pair, `m * batch` rows, segment-major.
pub fn build_pe_batch(
    channels: &[usize],
    params: &SegRnnParams,
    cfg: &ModelConfig,
) -> Result<Matrix> {
    let m = cfg.m_segments();
    let b = channels.len();
    let mut out = Matrix::zeros(m * b, cfg.hidden_dim);
    for j in 0..m {
        for (i, &ch) in channels.iter().enumerate() {
            let pe = build_pe(j, ch, params, cfg)?;
            out.row_mut(j * b + i).copy_from_slice(&pe);
        }
    }
    Ok(out)
}

/// Parallel decoding: one cell step per output segment, all from the same encoder state.
pub fn decode_pmf_batch(
    state: &State,
    channels: &[usize],
    params: &SegRnnParams,
    cfg: &ModelConfig,
    mode: Mode,
    rng: &mut Rng,
) -> Result<(Matrix, DecodeCache)> {
    let b = state.batch();
    if channels.len() != b {
        return Err(Error::Shape {
            op: "decode_pmf channels",
            left: (b, cfg.hidden_dim),
            right: (channels.len(), 1),
        });
    }
    let m = cfg.m_segments();
    let w = cfg.seg_len;
    if let Some(&ch) = channels.iter().find(|&&c| c >= cfg.num_channels) {
        return Err(Error::Bounds {
            what: "channel",
            index: ch,
            len: cfg.num_channels,
        });
    }
    // Every row of segment j shares the encoder state of its sample and one of
    // only m * C distinct embeddings.
    let c = cfg.num_channels;
    let mut table = Matrix::zeros(m * c, cfg.hidden_dim);
    for j in 0..m {
        for ch in 0..c {
            table
                .row_mut(j * c + ch)
                .copy_from_slice(&build_pe(j, ch, params, cfg)?);
        }
    }
    let input_rows: Vec<usize> = (0..m)
        .flat_map(|j| channels.iter().map(move |&ch| j * c + ch))
        .collect();
    let state_rows: Vec<usize> = (0..m).flat_map(|_| 0..b).collect();
    let (out, step) = cell_forward_gathered(&params.cell, &table, &input_rows, state, &state_rows)?;
    let (dropped, mask) = dropout_with_mask(&out.h, cfg.dropout_rate, mode, rng)?;
    let yw = crate::cells::affine(&dropped, &params.prediction_weight, &params.prediction_bias)?;

    let mut y = Matrix::zeros(b, cfg.horizon);
    for j in 0..m {
        for i in 0..b {
            y.row_mut(i)[j * w..(j + 1) * w].copy_from_slice(yw.row(j * b + i));
        }
    }
    Ok((
        y,
        DecodeCache::Parallel(Box::new(ParallelCache {
            channels: channels.to_vec(),
            step,
            mask,
            dropped,
        })),
    ))
}

/// Single-window form of [`decode_pmf_batch`].
pub fn decode_pmf(
    h_n: &State,
    channel: usize,
    params: &SegRnnParams,
    cfg: &ModelConfig,
    mode: Mode,
    rng: &mut Rng,
) -> Result<(Vec<Real>, DecodeCache)> {
    let (y, cache) = decode_pmf_batch(h_n, &[channel], params, cfg, mode, rng)?;
    Ok((y.into_vec(), cache))
}

/// Recurrent decoding: each predicted segment is re-projected and fed to the next step,
/// starting from `first_input` (`batch x d`).
pub fn decode_rmf_batch(
    state: &State,
    first_input: &Matrix,
    params: &SegRnnParams,
    cfg: &ModelConfig,
    mode: Mode,
    rng: &mut Rng,
) -> Result<(Matrix, DecodeCache)> {
    let b = state.batch();
    let w = cfg.seg_len;
    let mut y = Matrix::zeros(b, cfg.horizon);
    let mut steps = Vec::with_capacity(cfg.m_segments());
    let mut state = state.clone();
    let mut input = first_input.clone();
    let mut fed_back = None;
    for j in 0..cfg.m_segments() {
        let (next, cell) = cell_forward(&params.cell, &input, &state)?;
        let (dropped, mask) = dropout_with_mask(&next.h, cfg.dropout_rate, mode, rng)?;
        let pred =
            crate::cells::affine(&dropped, &params.prediction_weight, &params.prediction_bias)?;
        for i in 0..b {
            y.row_mut(i)[j * w..(j + 1) * w].copy_from_slice(pred.row(i));
        }
        steps.push(RecurrentStep {
            fed_back: fed_back.take(),
            cell,
            mask,
            dropped,
        });
        if j + 1 < cfg.m_segments() {
            let (pre, post) = project(&pred, params)?;
            fed_back = Some((pred, pre));
            input = post;
        }
        state = next;
    }
    Ok((y, DecodeCache::Recurrent(steps)))
}

/// Single-window form of [`decode_rmf_batch`].
pub fn decode_rmf(
    h_n: &State,
    first_input: &[Real],
    params: &SegRnnParams,
    cfg: &ModelConfig,
    mode: Mode,
    rng: &mut Rng,
) -> Result<(Vec<Real>, DecodeCache)> {
    let (y, cache) = decode_rmf_batch(
        h_n,
        &Matrix::row_vector(first_input),
        params,
        cfg,
        mode,
        rng,
    )?;
    Ok((y.into_vec(), cache))
}

/// Full pipeline on `batch x L` raw windows, keeping every intermediate.
pub fn forward_batch(
    x: &Matrix,
    channels: &[usize],
    params: &SegRnnParams,
    cfg: &ModelConfig,
    mode: Mode,
    rng: &mut Rng,
) -> Result<(Matrix, ForwardCache)> {
    let (mut y, cache) = forward_normalized(x, channels, params, cfg, mode, rng)?;
    denormalize_rows(&mut y, &cache.anchors);
    Ok((y, cache))
}

/// [`forward_batch`] without the final recovery step: predictions stay relative
/// to each window's last value, which `cache.anchors` records.
pub fn forward_normalized(
    x: &Matrix,
    channels: &[usize],
    params: &SegRnnParams,
    cfg: &ModelConfig,
    mode: Mode,
    rng: &mut Rng,
) -> Result<(Matrix, ForwardCache)> {
    if channels.len() != x.rows() {
        return Err(Error::Shape {
            op: "forward channels",
            left: x.shape(),
            right: (channels.len(), 1),
        });
    }
    let (x_norm, anchors) = normalize_rows(x)?;
    let (state, encode) = encode_batch(&x_norm, params, cfg)?;
    let (y, decode) = match cfg.decode_mode {
        DecodeMode::Pmf => decode_pmf_batch(&state, channels, params, cfg, mode, rng)?,
        DecodeMode::Rmf => {
            let first = encode.projected.last().expect("at least one segment");
            if let Some(&ch) = channels.iter().find(|&&c| c >= cfg.num_channels) {
                return Err(Error::Bounds {
                    what: "channel",
                    index: ch,
                    len: cfg.num_channels,
                });
            }
            decode_rmf_batch(&state, first, params, cfg, mode, rng)?
        }
    };
    Ok((
        y,
        ForwardCache {
            anchors,
            encode,
            decode,
        },
    ))
}

/// Batched prediction, `batch x L` in, `batch x H` out.
pub fn predict_batch(
    x: &Matrix,
    channels: &[usize],
    params: &SegRnnParams,
    cfg: &ModelConfig,
    mode: Mode,
    rng: &mut Rng,
) -> Result<Matrix> {
    Ok(forward_batch(x, channels, params, cfg, mode, rng)?.0)
}

/// Forecast `H` values for one look-back window of the given channel.
pub fn predict(
    x: &[Real],
    channel: usize,
    params: &SegRnnParams,
    cfg: &ModelConfig,
    mode: Mode,
    rng: &mut Rng,
) -> Result<Vec<Real>> {
    cfg.validate()?;
    params.check(cfg)?;
    Ok(predict_batch(&Matrix::row_vector(x), &[channel], params, cfg, mode, rng)?.into_vec())
}
