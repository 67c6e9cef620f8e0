use segrnn_cli::time_inference;
use segrnn_core::{ModelConfig, Rng, SegRnnParams};

#[test]
fn doubling_batch_does_not_reduce_time() {
    let cfg = ModelConfig::new(96, 96, 12, 64, 4);
    let params = SegRnnParams::init(&cfg, &mut Rng::new(0)).unwrap();
    let small = time_inference(&params, &cfg, 64, 5).unwrap();
    let large = time_inference(&params, &cfg, 128, 5).unwrap();
    assert_eq!(small.repeats, 5);
    assert!(small.mean_seconds > 0.0 && small.std_seconds >= 0.0);
    assert!(
        large.mean_seconds >= small.mean_seconds,
        "{} < {}",
        large.mean_seconds,
        small.mean_seconds
    );
}
