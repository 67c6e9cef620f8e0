use std::ops::Range;

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Real};

/// One channel-independent training pair.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowSample {
    pub x: Vec<Real>,
    pub y: Vec<Real>,
    pub channel: usize,
    /// Time index of `x[0]`; `y` starts at `origin_t + L`.
    pub origin_t: usize,
}

/// Sliding windows over a `T x C` block, ordered by start time then channel.
/// `origin_t` is relative to the first row of `values`.
pub fn make_windows(
    values: &Matrix,
    lookback: usize,
    horizon: usize,
    stride: usize,
) -> Result<Vec<WindowSample>> {
    make_windows_in(values, 0..values.rows(), lookback, horizon, stride)
}

/// Like [`make_windows`] but restricted to `range` of rows, with `origin_t`
/// reported in the coordinates of the full series.
pub fn make_windows_in(
    values: &Matrix,
    range: Range<usize>,
    lookback: usize,
    horizon: usize,
    stride: usize,
) -> Result<Vec<WindowSample>> {
    if lookback == 0 || horizon == 0 || stride == 0 {
        return Err(Error::config(format!(
            "look-back ({lookback}), horizon ({horizon}) and stride ({stride}) must be positive"
        )));
    }
    if range.end > values.rows() || range.start > range.end {
        return Err(Error::Bounds {
            what: "window range end",
            index: range.end,
            len: values.rows(),
        });
    }
    let span = lookback + horizon;
    if range.len() < span {
        return Err(Error::config(format!(
            "split of {} steps is shorter than look-back + horizon = {span}",
            range.len()
        )));
    }
    let c = values.cols();
    let starts = (range.start..range.end - span + 1).step_by(stride);
    let mut out = Vec::with_capacity(starts.len() * c);
    for t in starts {
        for ch in 0..c {
            let col = |a: usize, b: usize| (a..b).map(|r| values.get(r, ch)).collect::<Vec<_>>();
            out.push(WindowSample {
                x: col(t, t + lookback),
                y: col(t + lookback, t + span),
                channel: ch,
                origin_t: t,
            });
        }
    }
    Ok(out)
}

/// Stacks the look-back windows of `samples` into a `batch x L` matrix and
/// the targets into `batch x H`, returning the channel of every row.
pub fn stack_samples<S: std::borrow::Borrow<WindowSample>>(
    samples: &[S],
) -> Result<(Matrix, Matrix, Vec<usize>)> {
    let first = samples
        .first()
        .ok_or_else(|| Error::Precondition("cannot stack an empty batch".into()))?
        .borrow();
    let (l, h) = (first.x.len(), first.y.len());
    let mut x = Vec::with_capacity(samples.len() * l);
    let mut y = Vec::with_capacity(samples.len() * h);
    let mut channels = Vec::with_capacity(samples.len());
    for s in samples {
        let s = s.borrow();
        if s.x.len() != l || s.y.len() != h {
            return Err(Error::Shape {
                op: "stack samples",
                left: (l, h),
                right: (s.x.len(), s.y.len()),
            });
        }
        x.extend_from_slice(&s.x);
        y.extend_from_slice(&s.y);
        channels.push(s.channel);
    }
    let b = samples.len();
    Ok((
        Matrix::from_vec(b, l, x)?,
        Matrix::from_vec(b, h, y)?,
        channels,
    ))
}
