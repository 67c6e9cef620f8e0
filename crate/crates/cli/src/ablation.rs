use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use segrnn_core::training::EpochRecord;
use segrnn_core::{CellKind, DecodeMode, Error, Result};

use crate::experiment::{check_against, create_dir, load_dataset, run_on_series};
use crate::report::Report;
use crate::spec::ExperimentSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    SegLen,
    DecodeMode,
    Lookback,
    Cell,
    Pe,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::SegLen => "seg_len",
            Axis::DecodeMode => "decode_mode",
            Axis::Lookback => "lookback",
            Axis::Cell => "cell",
            Axis::Pe => "pe",
        }
    }

    /// Default sweep values.
    pub fn default_values(&self) -> Vec<String> {
        let v: &[&str] = match self {
            Axis::SegLen => &["1", "12", "48"],
            Axis::DecodeMode => &["pmf", "rmf"],
            Axis::Lookback => &["96", "192", "336", "720"],
            Axis::Cell => &["gru", "lstm", "rnn"],
            Axis::Pe => &["rp+cp", "rp", "cp", "none"],
        };
        v.iter().map(|s| s.to_string()).collect()
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "seg_len" => Ok(Axis::SegLen),
            "decode_mode" => Ok(Axis::DecodeMode),
            "lookback" => Ok(Axis::Lookback),
            "cell" => Ok(Axis::Cell),
            "pe" => Ok(Axis::Pe),
            other => Err(Error::Config(format!(
                "unknown ablation axis {other:?} (seg_len, decode_mode, lookback, cell, pe)"
            ))),
        }
    }
}

/// Copy of `base` with one field changed. Output goes to `<out>/<axis>-<value>`.
pub fn apply_axis(base: &ExperimentSpec, axis: Axis, value: &str) -> Result<ExperimentSpec> {
    let mut spec = base.clone();
    let bad = |what: &str| Error::Config(format!("invalid {axis} value {value:?}: {what}"));
    match axis {
        Axis::SegLen => spec.model.seg_len = value.parse().map_err(|_| bad("not an integer"))?,
        Axis::Lookback => spec.model.lookback = value.parse().map_err(|_| bad("not an integer"))?,
        Axis::DecodeMode => spec.model.decode_mode = DecodeMode::from_str(value)?,
        Axis::Cell => spec.model.cell = CellKind::from_str(value)?,
        Axis::Pe => {
            let (rp, cp) = match value.to_ascii_lowercase().as_str() {
                "rp+cp" => (true, true),
                "rp" => (true, false),
                "cp" => (false, true),
                "none" => (false, false),
                _ => return Err(bad("expected rp+cp, rp, cp or none")),
            };
            spec.model.use_relative_pe = rp;
            spec.model.use_channel_pe = cp;
        }
    }
    spec.out = base.out.join(format!("{axis}-{}", value.replace('+', "_")));
    spec.validate().map_err(|e| bad(&e.to_string()))?;
    Ok(spec)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: String,
    pub report: Report,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub axis: Axis,
    pub points: Vec<SweepPoint>,
}

impl Sweep {
    /// One row per value, ready for error-bar and timing plots.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut text = String::from(
            "axis,value,runs,mse_mean,mse_std,mae_mean,mae_std,seconds_per_epoch_mean,inference_seconds_mean,inference_seconds_std,parameter_count\n",
        );
        for p in &self.points {
            let a = &p.report.aggregate;
            let params = p.report.runs.first().map_or(0, |r| r.parameter_count);
            text.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                self.axis,
                p.value,
                a.runs,
                a.mse.mean,
                a.mse.std,
                a.mae.mean,
                a.mae.std,
                a.seconds_per_epoch.mean,
                a.inference_seconds.mean,
                a.inference_seconds.std,
                params
            ));
        }
        std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

pub fn run_ablation(base: &ExperimentSpec, axis: Axis, values: &[String]) -> Result<Sweep> {
    run_ablation_with(base, axis, values, |_, _, _| {})
}

/// One experiment per value with the base seeds. Every value is validated
/// against the data before anything is trained or written.
pub fn run_ablation_with(
    base: &ExperimentSpec,
    axis: Axis,
    values: &[String],
    mut on_epoch: impl FnMut(&str, u64, &EpochRecord),
) -> Result<Sweep> {
    if values.is_empty() {
        return Err(Error::Config(format!("no values given for axis {axis}")));
    }
    let specs: Vec<ExperimentSpec> = values
        .iter()
        .map(|v| apply_axis(base, axis, v))
        .collect::<Result<_>>()?;
    let series = load_dataset(base)?;
    for (spec, v) in specs.iter().zip(values) {
        check_against(spec, &series)
            .map_err(|e| Error::Config(format!("invalid {axis} value {v:?}: {e}")))?;
    }

    let mut points = Vec::with_capacity(specs.len());
    for (spec, v) in specs.iter().zip(values) {
        let report = run_on_series(spec, &series, |seed, e| on_epoch(v, seed, e))?;
        points.push(SweepPoint {
            value: v.clone(),
            report,
        });
    }
    let sweep = Sweep { axis, points };
    create_dir(&base.out)?;
    sweep.write_csv(&base.out.join(format!("sweep_{axis}.csv")))?;
    let json = serde_json::to_string_pretty(&sweep).map_err(|e| Error::Format {
        path: base.out.clone(),
        msg: e.to_string(),
    })?;
    let path = base.out.join(format!("sweep_{axis}.json"));
    std::fs::write(&path, json).map_err(|source| Error::Io { path, source })?;
    Ok(sweep)
}
