//! Loading, splitting, scaling and windowing of multichannel series.

mod registry;
mod series;
mod split;
mod standardize;
mod windows;

pub use registry::{DatasetEntry, DatasetRegistry};
pub use series::{load_csv, RawSeries};
pub use split::{chronological_split, SplitRanges, SplitSpec};
pub use standardize::{fit_standardizer, Standardizer};
pub use windows::{make_windows, make_windows_in, stack_samples, WindowSample};

use crate::error::Result;
use crate::numerics::Matrix;

/// Standardized window sets for the three splits of one series.
#[derive(Clone, Debug)]
pub struct PreparedData {
    pub ranges: SplitRanges,
    pub standardizer: Standardizer,
    pub train: Vec<WindowSample>,
    pub val: Vec<WindowSample>,
    pub test: Vec<WindowSample>,
    pub num_channels: usize,
}

/// Split chronologically, fit the scaler on the training rows, and cut stride-1
/// windows inside each split.
pub fn prepare(
    values: &Matrix,
    split: &SplitSpec,
    lookback: usize,
    horizon: usize,
) -> Result<PreparedData> {
    let ranges = chronological_split(values.rows(), split, lookback + horizon)?;
    let standardizer = fit_standardizer(&values.slice_rows(ranges.train.start, ranges.train.end))?;
    let scaled = standardizer.apply(values)?;
    let cut =
        |r: &std::ops::Range<usize>| make_windows_in(&scaled, r.clone(), lookback, horizon, 1);
    Ok(PreparedData {
        train: cut(&ranges.train)?,
        val: cut(&ranges.val)?,
        test: cut(&ranges.test)?,
        standardizer,
        num_channels: values.cols(),
        ranges,
    })
}
