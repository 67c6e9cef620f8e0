use super::{affine, CellParams};
use crate::error::{Error, Result};
use crate::numerics::{gemm, Matrix, Trans};

struct Tables<'a> {
    h: &'a Matrix,
    state_rows: &'a [usize],
    x: &'a Matrix,
    input_rows: &'a [usize],
}

/// Operands of one cell step. `concat` holds `[h_prev, x]` for every row.
///
/// Gathered steps draw their rows from a state table and an input table.
/// Gate products are then formed once per table row and summed per step
/// row, which gives the same pre-activations at lower cost when rows repeat.
pub(super) struct StepInput<'a> {
    pub concat: Matrix,
    hidden: usize,
    tables: Option<Tables<'a>>,
}

impl<'a> StepInput<'a> {
    pub fn dense(h: &Matrix, x: &Matrix) -> Result<Self> {
        Ok(StepInput {
            concat: Matrix::hstack(h, x)?,
            hidden: h.cols(),
            tables: None,
        })
    }

    pub fn gathered(
        h: &'a Matrix,
        state_rows: &'a [usize],
        x: &'a Matrix,
        input_rows: &'a [usize],
    ) -> Result<Self> {
        if state_rows.len() != input_rows.len() {
            return Err(Error::Shape {
                op: "gathered step rows",
                left: (state_rows.len(), h.cols()),
                right: (input_rows.len(), x.cols()),
            });
        }
        for (rows, table, what) in [
            (state_rows, h, "state table row"),
            (input_rows, x, "input table row"),
        ] {
            if let Some(&bad) = rows.iter().find(|&&r| r >= table.rows()) {
                return Err(Error::Bounds {
                    what,
                    index: bad,
                    len: table.rows(),
                });
            }
        }
        let hidden = h.cols();
        let mut concat = Matrix::zeros(state_rows.len(), hidden + x.cols());
        for (r, (&s, &i)) in state_rows.iter().zip(input_rows).enumerate() {
            let row = concat.row_mut(r);
            row[..hidden].copy_from_slice(h.row(s));
            row[hidden..].copy_from_slice(x.row(i));
        }
        Ok(StepInput {
            concat,
            hidden,
            tables: Some(Tables {
                h,
                state_rows,
                x,
                input_rows,
            }),
        })
    }

    pub fn h_prev(&self) -> Matrix {
        self.concat.slice_cols(0, self.hidden)
    }

    fn x(&self) -> Matrix {
        self.concat.slice_cols(self.hidden, self.concat.cols())
    }

    /// Expands a per-state-row table (such as the LSTM memory) to step rows.
    pub fn expand_state(&self, m: &Matrix) -> Matrix {
        match &self.tables {
            None => m.clone(),
            Some(t) => gather_sum(m, t.state_rows, None),
        }
    }

    /// `[h_prev, x] · Wᵀ + b` for gate `g`.
    pub fn pre(&self, p: &CellParams, g: usize) -> Result<Matrix> {
        match &self.tables {
            None => affine(&self.concat, &p.weights[g], &p.biases[g]),
            Some(t) => {
                let hw = state_product(t.h, &p.weights[g], self.hidden)?;
                let xw = input_product(t.x, p, g, self.hidden)?;
                Ok(gather_sum(&hw, t.state_rows, Some((&xw, t.input_rows))))
            }
        }
    }

    /// `[a, x]` and `[a, x] · Wᵀ + b` for gate `g`, where `a` has one row per
    /// step row and replaces the state block.
    pub fn pre_with_state(&self, p: &CellParams, g: usize, a: &Matrix) -> Result<(Matrix, Matrix)> {
        let concat = Matrix::hstack(a, &self.x())?;
        let pre = match &self.tables {
            None => affine(&concat, &p.weights[g], &p.biases[g])?,
            Some(t) => {
                let mut pre = state_product(a, &p.weights[g], self.hidden)?;
                let xw = input_product(t.x, p, g, self.hidden)?;
                for (r, &i) in t.input_rows.iter().enumerate() {
                    for (o, v) in pre.row_mut(r).iter_mut().zip(xw.row(i)) {
                        *o += v;
                    }
                }
                pre
            }
        };
        Ok((concat, pre))
    }
}

fn state_product(h: &Matrix, w: &Matrix, hidden: usize) -> Result<Matrix> {
    let mut out = Matrix::zeros(h.rows(), w.rows());
    gemm(
        1.0,
        h,
        Trans::No,
        &w.slice_cols(0, hidden),
        Trans::Yes,
        0.0,
        &mut out,
    )?;
    Ok(out)
}

fn input_product(x: &Matrix, p: &CellParams, g: usize, hidden: usize) -> Result<Matrix> {
    let w = &p.weights[g];
    affine(x, &w.slice_cols(hidden, w.cols()), &p.biases[g])
}

fn gather_sum(a: &Matrix, a_rows: &[usize], b: Option<(&Matrix, &[usize])>) -> Matrix {
    let mut out = Matrix::zeros(a_rows.len(), a.cols());
    for (r, &i) in a_rows.iter().enumerate() {
        out.row_mut(r).copy_from_slice(a.row(i));
    }
    if let Some((b, b_rows)) = b {
        for (r, &i) in b_rows.iter().enumerate() {
            for (o, v) in out.row_mut(r).iter_mut().zip(b.row(i)) {
                *o += v;
            }
        }
    }
    out
}
