//! One recurrent cell step, forward and analytic backward.
//!
//! Every operation is batched: inputs are `batch x input_dim` matrices and a
//! single sample is simply a one-row batch. Gate weights are stored as
//! `(hidden, hidden + input)` and multiply the concatenation `[h_prev, x]`,
//! hidden block first.

mod gru;
mod lstm;
mod rnn;
mod step;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{gemm, init_uniform, Matrix, Rng, Trans};

use step::StepInput;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    #[default]
    Gru,
    Rnn,
    Lstm,
}

impl CellKind {
    pub const ALL: [CellKind; 3] = [CellKind::Gru, CellKind::Rnn, CellKind::Lstm];

    pub fn gate_names(self) -> &'static [&'static str] {
        match self {
            CellKind::Gru => &["update", "reset", "candidate"],
            CellKind::Rnn => &["hidden"],
            CellKind::Lstm => &["input", "forget", "cell", "output"],
        }
    }

    pub fn gate_count(self) -> usize {
        self.gate_names().len()
    }

    pub fn has_cell_state(self) -> bool {
        self == CellKind::Lstm
    }
}

impl fmt::Display for CellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CellKind::Gru => "gru",
            CellKind::Rnn => "rnn",
            CellKind::Lstm => "lstm",
        })
    }
}

impl FromStr for CellKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gru" => Ok(CellKind::Gru),
            "rnn" => Ok(CellKind::Rnn),
            "lstm" => Ok(CellKind::Lstm),
            other => Err(Error::config(format!(
                "unknown cell kind {other:?} (expected gru, rnn or lstm)"
            ))),
        }
    }
}

/// Weights of a single recurrent layer, one `(weight, bias)` pair per gate.
#[derive(Clone, Debug, PartialEq)]
pub struct CellParams {
    pub kind: CellKind,
    pub input_dim: usize,
    pub hidden_dim: usize,
    /// `(hidden_dim, hidden_dim + input_dim)` per gate, in `gate_names` order.
    pub weights: Vec<Matrix>,
    /// `(1, hidden_dim)` per gate.
    pub biases: Vec<Matrix>,
}

impl CellParams {
    pub fn zeros(kind: CellKind, input_dim: usize, hidden_dim: usize) -> Self {
        let g = kind.gate_count();
        CellParams {
            kind,
            input_dim,
            hidden_dim,
            weights: vec![Matrix::zeros(hidden_dim, hidden_dim + input_dim); g],
            biases: vec![Matrix::zeros(1, hidden_dim); g],
        }
    }

    /// Fan-in uniform weights, zero biases.
    pub fn init(kind: CellKind, input_dim: usize, hidden_dim: usize, rng: &mut Rng) -> Self {
        let mut p = Self::zeros(kind, input_dim, hidden_dim);
        for w in &mut p.weights {
            *w = init_uniform(hidden_dim, hidden_dim + input_dim, rng);
        }
        p
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.kind, self.input_dim, self.hidden_dim)
    }

    pub fn parameter_count(&self) -> usize {
        self.kind.gate_count()
            * (self.hidden_dim * (self.input_dim + self.hidden_dim) + self.hidden_dim)
    }

    /// Named tensors in a fixed order (weight then bias, per gate).
    pub fn tensors(&self) -> Vec<(String, &Matrix)> {
        let names = self.kind.gate_names();
        let mut out = Vec::with_capacity(2 * names.len());
        for (i, name) in names.iter().enumerate() {
            out.push((format!("{name}.weight"), &self.weights[i]));
            out.push((format!("{name}.bias"), &self.biases[i]));
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        let mut out = Vec::with_capacity(2 * self.weights.len());
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            out.push(w);
            out.push(b);
        }
        out
    }

    fn check_input(&self, x: &Matrix, prev: &State) -> Result<()> {
        if x.rows() != prev.h.rows() {
            return Err(Error::Shape {
                op: "cell_forward input",
                left: x.shape(),
                right: (prev.h.rows(), self.input_dim),
            });
        }
        self.check_dims(x, prev)
    }

    fn check_dims(&self, x: &Matrix, prev: &State) -> Result<()> {
        if x.cols() != self.input_dim {
            return Err(Error::Shape {
                op: "cell_forward input",
                left: x.shape(),
                right: (x.rows(), self.input_dim),
            });
        }
        if prev.h.cols() != self.hidden_dim {
            return Err(Error::Shape {
                op: "cell_forward hidden",
                left: prev.h.shape(),
                right: (prev.h.rows(), self.hidden_dim),
            });
        }
        if self.kind.has_cell_state() != prev.c.is_some() {
            return Err(Error::Consistency(format!(
                "{} cell given a state {} cell memory",
                self.kind,
                if prev.c.is_some() { "with" } else { "without" }
            )));
        }
        Ok(())
    }
}

/// Recurrent state: hidden output plus the LSTM cell memory when present.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub h: Matrix,
    pub c: Option<Matrix>,
}

impl State {
    pub fn zeros(kind: CellKind, batch: usize, hidden_dim: usize) -> Self {
        State {
            h: Matrix::zeros(batch, hidden_dim),
            c: kind
                .has_cell_state()
                .then(|| Matrix::zeros(batch, hidden_dim)),
        }
    }

    pub fn from_hidden(h: Matrix) -> Self {
        State { h, c: None }
    }

    pub fn batch(&self) -> usize {
        self.h.rows()
    }

    pub fn repeat_rows(&self, times: usize) -> State {
        State {
            h: self.h.repeat_rows(times),
            c: self.c.as_ref().map(|c| c.repeat_rows(times)),
        }
    }

    pub fn sum_row_blocks(&self, times: usize) -> State {
        State {
            h: self.h.sum_row_blocks(times),
            c: self.c.as_ref().map(|c| c.sum_row_blocks(times)),
        }
    }

    pub fn add_assign(&mut self, other: &State) {
        self.h.add_assign(&other.h);
        if let (Some(a), Some(b)) = (self.c.as_mut(), other.c.as_ref()) {
            a.add_assign(b);
        }
    }
}

/// Intermediates saved by `cell_forward`, enough for an exact backward pass.
#[derive(Clone, Debug)]
pub enum StepCache {
    Gru(gru::GruCache),
    Rnn(rnn::RnnCache),
    Lstm(lstm::LstmCache),
}

impl StepCache {
    pub fn kind(&self) -> CellKind {
        match self {
            StepCache::Gru(_) => CellKind::Gru,
            StepCache::Rnn(_) => CellKind::Rnn,
            StepCache::Lstm(_) => CellKind::Lstm,
        }
    }

    pub fn batch(&self) -> usize {
        match self {
            StepCache::Gru(c) => c.h_prev.rows(),
            StepCache::Rnn(c) => c.concat.rows(),
            StepCache::Lstm(c) => c.c_prev.rows(),
        }
    }

    /// Gate activations in `gate_names` order (candidate/cell gates included).
    pub fn gates(&self) -> Vec<&Matrix> {
        match self {
            StepCache::Gru(c) => vec![&c.z, &c.r, &c.candidate],
            StepCache::Rnn(c) => vec![&c.h],
            StepCache::Lstm(c) => vec![&c.i, &c.f, &c.g, &c.o],
        }
    }
}

pub fn cell_forward(p: &CellParams, x: &Matrix, prev: &State) -> Result<(State, StepCache)> {
    p.check_input(x, prev)?;
    step_forward(p, StepInput::dense(&prev.h, x)?, prev)
}

/// One step over rows gathered from smaller tables: row `r` pairs state row
/// `state_rows[r]` of `prev` with row `input_rows[r]` of `x`.
///
/// Equal to `cell_forward` on the expanded operands, and the cache has the
/// same layout, but each gate product is formed once per table row.
pub fn cell_forward_gathered(
    p: &CellParams,
    x: &Matrix,
    input_rows: &[usize],
    prev: &State,
    state_rows: &[usize],
) -> Result<(State, StepCache)> {
    p.check_dims(x, prev)?;
    step_forward(
        p,
        StepInput::gathered(&prev.h, state_rows, x, input_rows)?,
        prev,
    )
}

fn step_forward(p: &CellParams, input: StepInput, prev: &State) -> Result<(State, StepCache)> {
    Ok(match p.kind {
        CellKind::Gru => {
            let (h, cache) = gru::forward(p, input)?;
            (State::from_hidden(h), StepCache::Gru(cache))
        }
        CellKind::Rnn => {
            let (h, cache) = rnn::forward(p, input)?;
            (State::from_hidden(h), StepCache::Rnn(cache))
        }
        CellKind::Lstm => {
            let c_prev = prev.c.as_ref().expect("checked by caller");
            let (state, cache) = lstm::forward(p, input, c_prev)?;
            (state, StepCache::Lstm(cache))
        }
    })
}

/// Backward through one step given the upstream gradient on the new state.
/// Returns `(dx, dstate_prev, dparams)`.
pub fn cell_backward(
    p: &CellParams,
    cache: &StepCache,
    dstate: &State,
) -> Result<(Matrix, State, CellParams)> {
    let mut grads = p.zeros_like();
    let (dx, dprev) = cell_backward_into(p, cache, dstate, &mut grads)?;
    Ok((dx, dprev, grads))
}

/// As `cell_backward`, accumulating parameter gradients into `grads`.
pub fn cell_backward_into(
    p: &CellParams,
    cache: &StepCache,
    dstate: &State,
    grads: &mut CellParams,
) -> Result<(Matrix, State)> {
    if cache.kind() != p.kind || grads.kind != p.kind {
        return Err(Error::Consistency(format!(
            "cache from a {} cell used with {} parameters",
            cache.kind(),
            p.kind
        )));
    }
    if dstate.h.shape() != (cache.batch(), p.hidden_dim) {
        return Err(Error::Consistency(format!(
            "upstream gradient {:?} does not match cached batch {} x {}",
            dstate.h.shape(),
            cache.batch(),
            p.hidden_dim
        )));
    }
    match cache {
        StepCache::Gru(c) => {
            let (dx, dh) = gru::backward(p, c, &dstate.h, grads)?;
            Ok((dx, State::from_hidden(dh)))
        }
        StepCache::Rnn(c) => {
            let (dx, dh) = rnn::backward(p, c, &dstate.h, grads)?;
            Ok((dx, State::from_hidden(dh)))
        }
        StepCache::Lstm(c) => {
            let zero;
            let dc = match dstate.c.as_ref() {
                Some(dc) => dc,
                None => {
                    zero = Matrix::zeros(dstate.h.rows(), p.hidden_dim);
                    &zero
                }
            };
            lstm::backward(p, c, &dstate.h, dc, grads)
        }
    }
}

/// Runs the cell over `inputs` from `h0`; returns the final state and one cache per step.
pub fn sequence_forward(
    p: &CellParams,
    inputs: &[Matrix],
    h0: &State,
) -> Result<(State, Vec<StepCache>)> {
    if inputs.is_empty() {
        return Err(Error::Precondition(
            "sequence_forward needs at least one input step".into(),
        ));
    }
    let mut state = h0.clone();
    let mut caches = Vec::with_capacity(inputs.len());
    for x in inputs {
        let (next, cache) = cell_forward(p, x, &state)?;
        caches.push(cache);
        state = next;
    }
    Ok((state, caches))
}

/// Backpropagation through time over `sequence_forward`.
/// Returns `(dinputs, dh0, dparams)` with parameter gradients summed over steps.
pub fn sequence_backward(
    p: &CellParams,
    caches: &[StepCache],
    dstate_n: &State,
) -> Result<(Vec<Matrix>, State, CellParams)> {
    let mut grads = p.zeros_like();
    let (dinputs, dh0) = sequence_backward_into(p, caches, dstate_n, &mut grads)?;
    Ok((dinputs, dh0, grads))
}

pub fn sequence_backward_into(
    p: &CellParams,
    caches: &[StepCache],
    dstate_n: &State,
    grads: &mut CellParams,
) -> Result<(Vec<Matrix>, State)> {
    if caches.is_empty() {
        return Err(Error::Consistency(
            "no cached steps to backpropagate".into(),
        ));
    }
    let mut dinputs = vec![Matrix::zeros(0, 0); caches.len()];
    let mut dstate = dstate_n.clone();
    for (t, cache) in caches.iter().enumerate().rev() {
        let (dx, dprev) = cell_backward_into(p, cache, &dstate, grads)?;
        dinputs[t] = dx;
        dstate = dprev;
    }
    Ok((dinputs, dstate))
}

/// `a · Wᵀ + b` for every row of `a`.
pub(crate) fn affine(a: &Matrix, w: &Matrix, b: &Matrix) -> Result<Matrix> {
    let mut out = Matrix::zeros(a.rows(), w.rows());
    gemm(1.0, a, Trans::No, w, Trans::Yes, 0.0, &mut out)?;
    out.add_row_broadcast(b);
    Ok(out)
}

/// Accumulates `dW += dpreᵀ · a`, `db += colsum(dpre)` and `da += dpre · W`.
pub(crate) fn affine_backward(
    dpre: &Matrix,
    a: &Matrix,
    w: &Matrix,
    dw: &mut Matrix,
    db: &mut Matrix,
    da: &mut Matrix,
) -> Result<()> {
    gemm(1.0, dpre, Trans::Yes, a, Trans::No, 1.0, dw)?;
    db.add_assign(&dpre.column_sums());
    gemm(1.0, dpre, Trans::No, w, Trans::No, 1.0, da)?;
    Ok(())
}
