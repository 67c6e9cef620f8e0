mod common;

use std::fs;

use segrnn_cli::{
    apply_axis, evaluate_checkpoint, run_ablation, run_experiment, Axis, Report, SpecLayer,
};
use segrnn_core::model::count_parameters_for;
use segrnn_core::DecodeMode;

use common::{small_layer, small_spec, write_sine_dataset};

fn schema() -> serde_json::Value {
    let text = include_str!("../schema/report.schema.json");
    serde_json::from_str(text).unwrap()
}

#[test]
fn report_matches_schema_and_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = small_spec(dir.path());
    spec.seeds = vec![1, 2, 3];
    let report = run_experiment(&spec).unwrap();

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(spec.out.join("report.json")).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema()).unwrap();
    let errors: Vec<String> = validator
        .iter_errors(&json)
        .map(|e| e.to_string())
        .collect();
    assert!(errors.is_empty(), "{errors:?}");

    assert_eq!(report.runs.len(), 3);
    let mean = report.runs.iter().map(|r| r.mse).sum::<f64>() / 3.0;
    assert!((report.aggregate.mse.mean - mean).abs() <= 1e-9 * mean.max(1.0));
    assert!(report.aggregate_consistent(1e-9));
    assert_eq!(
        Report::read_json(&spec.out.join("report.json")).unwrap(),
        report
    );

    for (i, run) in report.runs.iter().enumerate() {
        let stem = format!("run{i}_seed{}", run.seed);
        let csv = fs::read_to_string(spec.out.join(format!("history_{stem}.csv"))).unwrap();
        assert!(csv.starts_with("epoch,train_loss,val_loss,lr,seconds"));
        assert_eq!(csv.lines().count(), run.history.len() + 1);
        assert!(spec.out.join(format!("checkpoint_{stem}.json")).exists());
    }
}

#[test]
fn report_with_extra_field_fails_schema() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_spec(dir.path());
    run_experiment(&spec).unwrap();
    let mut json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(spec.out.join("report.json")).unwrap()).unwrap();
    json["runs"][0]["mse"] = serde_json::json!(-1.0);
    assert!(!jsonschema::is_valid(&schema(), &json));
}

#[test]
fn equal_seeds_give_identical_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = small_spec(dir.path());
    spec.seeds = vec![5, 5];
    let report = run_experiment(&spec).unwrap();
    let strip = |i: usize| {
        let mut r = report.runs[i].clone();
        r.seconds_per_epoch = 0.0;
        r.inference_seconds = 0.0;
        for e in &mut r.history {
            e.seconds = 0.0;
        }
        r
    };
    assert_eq!(strip(0), strip(1));
    assert_eq!(report.aggregate.mse.std, 0.0);
}

#[test]
fn checkpoint_reproduces_test_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_spec(dir.path());
    let report = run_experiment(&spec).unwrap();
    let path = spec
        .out
        .join(format!("checkpoint_run0_seed{}.json", spec.seeds[0]));
    let (cfg, metrics) = evaluate_checkpoint(&spec, &path).unwrap();
    assert_eq!(cfg, spec.model);
    assert!((metrics.mse - report.runs[0].mse).abs() <= 1e-12 * report.runs[0].mse.max(1.0));
    assert!((metrics.mae - report.runs[0].mae).abs() <= 1e-12 * report.runs[0].mae.max(1.0));
}

#[test]
fn decode_mode_sweep_keeps_parameter_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = small_spec(dir.path());
    spec.train.epochs = 1;
    spec.train.patience = 1;
    let values = Axis::DecodeMode.default_values();
    let sweep = run_ablation(&spec, Axis::DecodeMode, &values).unwrap();
    assert_eq!(sweep.points.len(), 2);
    let counts: Vec<usize> = sweep
        .points
        .iter()
        .map(|p| p.report.runs[0].parameter_count)
        .collect();
    assert_eq!(counts[0], counts[1]);
    assert_eq!(sweep.points[0].report.model.decode_mode, DecodeMode::Pmf);
    assert_eq!(sweep.points[1].report.model.decode_mode, DecodeMode::Rmf);
    let mut a = sweep.points[0].report.model.clone();
    a.decode_mode = DecodeMode::Rmf;
    assert_eq!(a, sweep.points[1].report.model);
    assert!(spec.out.join("sweep_decode_mode.csv").exists());
    assert!(spec
        .out
        .join("decode_mode-pmf")
        .join("report.json")
        .exists());
}

#[test]
fn seg_len_sweep_counts_differ_as_configured() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_spec(dir.path());
    for v in ["1", "12", "24"] {
        let s = apply_axis(&spec, Axis::SegLen, v).unwrap();
        assert_eq!(s.model.seg_len.to_string(), v);
        assert!(count_parameters_for(&s.model) > 0);
    }
}

#[test]
fn invalid_sweep_value_fails_before_training() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_spec(dir.path());
    let values = vec!["12".to_string(), "7".to_string()];
    let err = run_ablation(&spec, Axis::SegLen, &values).unwrap_err();
    assert!(err.to_string().contains("\"7\""), "{err}");
    assert!(!spec.out.exists());

    let mut long = spec.clone();
    long.max_rows = Some(200);
    let err = run_ablation(&long, Axis::Lookback, &["48".into(), "192".into()]).unwrap_err();
    assert!(matches!(err, segrnn_core::Error::Config(_)), "{err}");
    assert!(!spec.out.exists());
}

#[test]
fn missing_dataset_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let registry = write_sine_dataset(dir.path(), 400);
    let layer = small_layer(&registry, &dir.path().join("out"));
    let spec = layer.resolve_from_data().unwrap();
    fs::remove_file(dir.path().join("sine.csv")).unwrap();
    assert!(run_experiment(&spec).unwrap_err().is_io());

    let unknown = SpecLayer {
        dataset: Some("nope".into()),
        ..layer
    };
    assert!(matches!(
        unknown.resolve_from_data(),
        Err(segrnn_core::Error::Config(_))
    ));
}

#[test]
fn channel_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = small_spec(dir.path());
    spec.model.num_channels = 3;
    assert!(matches!(
        run_experiment(&spec),
        Err(segrnn_core::Error::Config(_))
    ));
    assert!(!spec.out.exists());
}
