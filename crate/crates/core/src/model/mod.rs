//! The segment-recurrent forecaster: instance normalization, segment projection,
//! recurrent encoding, parallel or recurrent decoding, and sequence recovery.

mod backward;
pub mod checkpoint;
mod config;
mod dropout;
mod forward;
mod norm;
mod params;
mod segment;

pub use backward::backward;
pub use config::{DecodeMode, Mode, ModelConfig};
pub use dropout::{dropout, dropout_with_mask};
pub use forward::{
    build_pe, build_pe_batch, decode_pmf, decode_pmf_batch, decode_rmf, decode_rmf_batch, encode,
    encode_batch, forward_batch, forward_normalized, predict, predict_batch, DecodeCache,
    EncodeCache, ForwardCache, ParallelCache, RecurrentStep,
};
pub use norm::{
    denormalize_rows, instance_denormalize, instance_normalize, normalize_rows, NormAnchor,
};
pub use params::{count_parameters, count_parameters_for, SegRnnParams};
pub use segment::segment_partition;
