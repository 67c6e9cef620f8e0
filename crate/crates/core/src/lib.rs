//! Segment-recurrent forecasting: segment-wise recurrent encoding with parallel
//! or recurrent multi-step decoding, trained with backpropagation through time.

pub mod baseline;
pub mod cells;
pub mod data;
pub mod error;
pub mod model;
pub mod numerics;
pub mod training;

pub use cells::{CellKind, CellParams};
pub use data::{RawSeries, SplitSpec, Standardizer, WindowSample};
pub use error::{Error, Result};
pub use model::{DecodeMode, Mode, ModelConfig, SegRnnParams};
pub use numerics::{Matrix, Real, Rng};
pub use training::{Metrics, TrainConfig, TrainHistory};
