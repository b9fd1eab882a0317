//! Central-difference check of the analytic gradient in double precision.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::network::{loss_and_grad, Sample};
use super::params::{ModelConfig, Params};

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub checked: usize,
    /// Coordinate with the largest error, as `tensor[index]`.
    pub worst: String,
}

/// `|a - n| / max(|a|, |n|, floor)`.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// Compares analytic and numeric derivatives on up to `per_tensor` random
/// coordinates of every tensor. Dropout is off.
pub fn gradient_check(
    params: &Params<f64>,
    cfg: &ModelConfig,
    samples: &[Sample],
    per_tensor: usize,
    step: f64,
    seed: u64,
) -> GradCheckReport {
    let refs: Vec<&Sample> = samples.iter().collect();
    let (_, _, grads) = loss_and_grad(params, cfg, &refs, true, None);
    let grads = grads.expect("gradients requested");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probe = params.clone();
    let mut report = GradCheckReport { max_rel_error: 0.0, checked: 0, worst: String::new() };
    let names: Vec<String> = params.named().into_iter().map(|(n, _)| n).collect();
    for (ti, name) in names.iter().enumerate() {
        let len = params.named()[ti].1.data.len();
        let picks = sample(&mut rng, len, per_tensor.min(len));
        for i in picks {
            let orig = params.named()[ti].1.data[i];
            probe.named_mut()[ti].1.data[i] = orig + step;
            let (plus, _, _) = loss_and_grad(&probe, cfg, &refs, false, None);
            probe.named_mut()[ti].1.data[i] = orig - step;
            let (minus, _, _) = loss_and_grad(&probe, cfg, &refs, false, None);
            probe.named_mut()[ti].1.data[i] = orig;
            let numeric = (plus - minus) / (2.0 * step);
            let analytic = grads.named()[ti].1.data[i];
            let err = relative_error(analytic, numeric, 1e-6);
            report.checked += 1;
            if err > report.max_rel_error || report.worst.is_empty() {
                report.max_rel_error = report.max_rel_error.max(err);
                report.worst = format!("{name}[{i}] analytic {analytic:.3e} numeric {numeric:.3e}");
            }
        }
    }
    report
}
