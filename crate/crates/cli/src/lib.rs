//! Experiment runner for the segment-recurrent forecaster: configuration
//! layering, training and evaluation reports, ablation sweeps, inference
//! timing and gradient-check suites.

pub mod ablation;
pub mod experiment;
pub mod gradcheck;
pub mod report;
pub mod spec;
pub mod timing;

pub use ablation::{apply_axis, run_ablation, run_ablation_with, Axis, Sweep, SweepPoint};
pub use experiment::{
    check_against, evaluate_checkpoint, load_dataset, run_experiment, run_experiment_with,
    run_on_series,
};
pub use gradcheck::{gradcheck_suite, random_config, GradCheckCase};
pub use report::{Aggregate, Report, RunRecord, Summary};
pub use spec::{ExperimentSpec, SpecLayer};
pub use timing::{time_inference, time_inference_on, Timing, WARMUP_RUNS};

/// Process exit code for a failed command: 3 for I/O and file-format
/// problems, 2 for invalid configurations or data, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<segrnn_core::Error>() {
            return match e {
                segrnn_core::Error::Io { .. }
                | segrnn_core::Error::Format { .. }
                | segrnn_core::Error::Parse { .. } => 3,
                _ => 2,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 3;
        }
    }
    1
}
