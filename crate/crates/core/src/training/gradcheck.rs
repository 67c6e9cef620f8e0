use crate::data::{stack_samples, WindowSample};
use crate::error::Result;
use crate::model::{
    forward_normalized, DecodeCache, ForwardCache, Mode, ModelConfig, SegRnnParams,
};
use crate::numerics::{Matrix, Real, Rng};

use super::gradients::compute_gradients;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: Real,
    /// Tensor name and flat index of the worst entry.
    pub worst: Option<(String, usize)>,
    /// Analytic and finite-difference values at the worst entry.
    pub worst_values: (Real, Real),
    pub checked: usize,
    /// Entries whose stencil crossed a ReLU or absolute-value kink, where a
    /// central difference is not a derivative estimate. Not scored.
    pub kinks: usize,
}

/// Random parameters for gradient checking: the usual init plus uniform
/// biases in `[-0.5, 0.5]`, so ReLU inputs do not sit at their kink.
pub fn generic_params(cfg: &ModelConfig, rng: &mut Rng) -> Result<SegRnnParams> {
    let mut p = SegRnnParams::init(cfg, rng)?;
    let mut biases = vec![&mut p.projection_bias, &mut p.prediction_bias];
    biases.extend(p.cell.biases.iter_mut());
    for b in biases {
        for v in b.as_mut_slice() {
            *v = rng.uniform(-0.5, 0.5);
        }
    }
    Ok(p)
}

/// `|a - f| / max(|a|, |f|, 1e-8)`.
pub fn relative_error(analytic: Real, numeric: Real) -> Real {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Compares analytic gradients of the mean MAE against central differences with
/// step `eps` on every parameter. Runs in eval mode, so dropout is off.
///
/// The loss difference is accumulated element by element from predictions in
/// normalized space, so entries whose true gradient is zero come out as zero
/// instead of as summation noise.
pub fn grad_check(
    params: &SegRnnParams,
    samples: &[WindowSample],
    cfg: &ModelConfig,
    eps: Real,
) -> Result<GradCheckReport> {
    cfg.validate()?;
    params.check(cfg)?;
    let (_, grads) = compute_gradients(samples, params, cfg, Mode::Eval, &mut Rng::new(0))?;
    let analytic: Vec<(String, Vec<Real>)> = grads
        .tensors()
        .into_iter()
        .map(|(n, m)| (n, m.as_slice().to_vec()))
        .collect();

    let (x, y, channels) = stack_samples(samples)?;
    let predict = |p: &SegRnnParams| -> Result<(Matrix, ForwardCache)> {
        forward_normalized(&x, &channels, p, cfg, Mode::Eval, &mut Rng::new(0))
    };
    let (_, base) = predict(params)?;
    let mut target = y.clone();
    for (r, a) in base.anchors.iter().enumerate() {
        for v in target.row_mut(r) {
            *v -= a.last_value;
        }
    }
    let scale = 1.0 / (2.0 * eps * y.len() as Real);

    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        worst: None,
        worst_values: (0.0, 0.0),
        checked: 0,
        kinks: 0,
    };
    let mut probe = params.clone();
    for (k, (name, a)) in analytic.iter().enumerate() {
        for (i, &ai) in a.iter().enumerate() {
            let original = probe.tensors_mut()[k].as_slice()[i];
            probe.tensors_mut()[k].as_mut_slice()[i] = original + eps;
            let (up, up_cache) = predict(&probe)?;
            probe.tensors_mut()[k].as_mut_slice()[i] = original - eps;
            let (down, down_cache) = predict(&probe)?;
            probe.tensors_mut()[k].as_mut_slice()[i] = original;
            if kink_pattern(&up, &target, &up_cache) != kink_pattern(&down, &target, &down_cache) {
                report.kinks += 1;
                continue;
            }
            let f = loss_difference(&up, &down, &target) * scale;
            let err = relative_error(ai, f);
            report.checked += 1;
            if err > report.max_relative_error {
                report.max_relative_error = err;
                report.worst = Some((name.clone(), i));
                report.worst_values = (ai, f);
            }
        }
    }
    Ok(report)
}

/// Sign of every loss residual and every ReLU input along the forward pass.
fn kink_pattern(pred: &Matrix, target: &Matrix, cache: &ForwardCache) -> Vec<bool> {
    let mut out: Vec<bool> = pred
        .as_slice()
        .iter()
        .zip(target.as_slice())
        .map(|(p, t)| p > t)
        .collect();
    let mut relu_inputs: Vec<&Matrix> = cache.encode.projected_pre.iter().collect();
    if let DecodeCache::Recurrent(steps) = &cache.decode {
        relu_inputs.extend(
            steps
                .iter()
                .filter_map(|s| s.fed_back.as_ref().map(|(_, pre)| pre)),
        );
    }
    for m in relu_inputs {
        out.extend(m.as_slice().iter().map(|v| *v > 0.0));
    }
    out
}

/// `sum |up - t| - sum |down - t|`, differencing each element before summing.
fn loss_difference(up: &Matrix, down: &Matrix, target: &Matrix) -> Real {
    let mut total = 0.0;
    for ((&u, &d), &t) in up
        .as_slice()
        .iter()
        .zip(down.as_slice())
        .zip(target.as_slice())
    {
        let (eu, ed) = (u - t, d - t);
        total += if eu >= 0.0 && ed >= 0.0 {
            u - d
        } else if eu <= 0.0 && ed <= 0.0 {
            d - u
        } else {
            eu.abs() - ed.abs()
        };
    }
    total
}
