use std::fs;
use std::path::{Path, PathBuf};

use segrnn_core::baseline::repeat_last_metrics;
use segrnn_core::data::{chronological_split, load_csv, prepare, stack_samples, PreparedData};
use segrnn_core::model::{checkpoint, count_parameters};
use segrnn_core::training::{evaluate, train_with, EpochRecord};
use segrnn_core::{Error, Metrics, ModelConfig, RawSeries, Result, Rng, SegRnnParams, TrainConfig};

use crate::report::{Report, RunRecord};
use crate::spec::ExperimentSpec;
use crate::timing::time_inference_on;

/// Reads the spec's dataset, truncated to `max_rows` when set.
pub fn load_dataset(spec: &ExperimentSpec) -> Result<RawSeries> {
    let series = load_csv(&spec.dataset_path()?)?;
    Ok(match spec.max_rows {
        Some(n) => series.prefix(n),
        None => series,
    })
}

/// Checks that the spec fits the data: channel count and split sizes.
pub fn check_against(spec: &ExperimentSpec, series: &RawSeries) -> Result<()> {
    spec.validate()?;
    if spec.model.num_channels != series.num_channels() {
        return Err(Error::Config(format!(
            "configuration has {} channels, {} has {}",
            spec.model.num_channels,
            spec.dataset,
            series.num_channels()
        )));
    }
    chronological_split(
        series.len(),
        &spec.split()?,
        spec.model.lookback + spec.model.horizon,
    )?;
    Ok(())
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<Report> {
    run_experiment_with(spec, |_, _| {})
}

/// Load, split, standardize, window, then train and test once per seed.
/// Writes `report.json` plus a history CSV and checkpoint per run into `spec.out`.
pub fn run_experiment_with(
    spec: &ExperimentSpec,
    on_epoch: impl FnMut(u64, &EpochRecord),
) -> Result<Report> {
    spec.validate()?;
    let series = load_dataset(spec)?;
    run_on_series(spec, &series, on_epoch)
}

/// [`run_experiment_with`] on an already loaded series.
pub fn run_on_series(
    spec: &ExperimentSpec,
    series: &RawSeries,
    mut on_epoch: impl FnMut(u64, &EpochRecord),
) -> Result<Report> {
    check_against(spec, series)?;
    let cfg = &spec.model;
    let data = prepare(&series.values, &spec.split()?, cfg.lookback, cfg.horizon)?;
    let baseline = repeat_last_metrics(&data.test)?;
    create_dir(&spec.out)?;

    let mut runs = Vec::with_capacity(spec.repeats());
    for (i, &seed) in spec.seeds.iter().enumerate() {
        let (params, record) = run_seed(spec, &data, seed, &mut on_epoch)?;
        let stem = format!("run{i}_seed{seed}");
        let history = segrnn_core::TrainHistory {
            epochs: record.history.clone(),
            best_epoch: record.best_epoch,
            stopped_early: false,
        };
        history.write_csv(&spec.out.join(format!("history_{stem}.csv")))?;
        checkpoint::save(
            &spec.out.join(format!("checkpoint_{stem}.json")),
            cfg,
            &params,
        )?;
        runs.push(record);
    }
    let report = Report::new(
        spec.dataset.clone(),
        cfg.clone(),
        spec.train.clone(),
        baseline,
        runs,
    );
    report.write_json(&spec.out.join("report.json"))?;
    Ok(report)
}

fn run_seed(
    spec: &ExperimentSpec,
    data: &PreparedData,
    seed: u64,
    on_epoch: &mut impl FnMut(u64, &EpochRecord),
) -> Result<(SegRnnParams, RunRecord)> {
    let cfg = &spec.model;
    let mut rng = Rng::new(seed);
    let params = SegRnnParams::init(cfg, &mut rng)?;
    let tc = TrainConfig {
        seed: rng.next_u64(),
        ..spec.train.clone()
    };
    let (best, history) = train_with(&data.train, &data.val, params, cfg, &tc, |e| {
        on_epoch(seed, e)
    })?;
    let test: Metrics = evaluate(&data.test, &best, cfg)?;
    let n = spec.timing_batch.min(data.test.len());
    let (x, _, channels) = stack_samples(&data.test[..n])?;
    let timing = time_inference_on(&x, &channels, &best, cfg, spec.timing_repeats)?;
    let record = RunRecord {
        seed,
        mse: test.mse,
        mae: test.mae,
        seconds_per_epoch: history.mean_epoch_seconds(),
        inference_seconds: timing.mean_seconds,
        parameter_count: count_parameters(&best),
        best_epoch: history.best_epoch,
        history: history.epochs,
    };
    Ok((best, record))
}

/// Test-split metrics of a saved checkpoint on the spec's dataset.
pub fn evaluate_checkpoint(spec: &ExperimentSpec, path: &Path) -> Result<(ModelConfig, Metrics)> {
    let (cfg, params) = checkpoint::load(path)?;
    let series = load_dataset(spec)?;
    let spec = ExperimentSpec {
        model: cfg.clone(),
        ..spec.clone()
    };
    check_against(&spec, &series)?;
    let data = prepare(&series.values, &spec.split()?, cfg.lookback, cfg.horizon)?;
    Ok((cfg.clone(), evaluate(&data.test, &params, &cfg)?))
}

pub(crate) fn create_dir(path: &PathBuf) -> Result<()> {
    fs::create_dir_all(path).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })
}
