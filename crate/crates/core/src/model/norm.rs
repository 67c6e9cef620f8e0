use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Real};

/// Last look-back value, subtracted before the network and added back after.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormAnchor {
    pub last_value: Real,
}

pub fn instance_normalize(x: &[Real]) -> Result<(Vec<Real>, NormAnchor)> {
    let last = *x
        .last()
        .ok_or_else(|| Error::Precondition("cannot normalize an empty window".into()))?;
    Ok((
        x.iter().map(|v| v - last).collect(),
        NormAnchor { last_value: last },
    ))
}

pub fn instance_denormalize(y_norm: &[Real], anchor: NormAnchor) -> Vec<Real> {
    y_norm.iter().map(|v| v + anchor.last_value).collect()
}

/// Row-wise `instance_normalize` over a `batch x L` matrix.
pub fn normalize_rows(x: &Matrix) -> Result<(Matrix, Vec<NormAnchor>)> {
    if x.cols() == 0 {
        return Err(Error::Precondition(
            "cannot normalize an empty window".into(),
        ));
    }
    let mut out = x.clone();
    let mut anchors = Vec::with_capacity(x.rows());
    for r in 0..x.rows() {
        let row = out.row_mut(r);
        let last = row[row.len() - 1];
        row.iter_mut().for_each(|v| *v -= last);
        anchors.push(NormAnchor { last_value: last });
    }
    Ok((out, anchors))
}

pub fn denormalize_rows(y: &mut Matrix, anchors: &[NormAnchor]) {
    assert_eq!(y.rows(), anchors.len(), "one anchor per row");
    for (r, a) in anchors.iter().enumerate() {
        y.row_mut(r).iter_mut().for_each(|v| *v += a.last_value);
    }
}
