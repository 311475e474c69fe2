//! Statistical helpers: Gaussian tail, binomial errors, and a one-sample
//! Kolmogorov-Smirnov normality test.

use libm::erfc;

/// Gaussian tail `Q(x) = P(Z > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

fn normal_cdf(x: f64, mean: f64, std_dev: f64) -> f64 {
    q_function((mean - x) / std_dev)
}

/// Standard error of a proportion estimated from `trials` Bernoulli draws.
pub fn binomial_stderr(p: f64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    (p.clamp(0.0, 1.0) * (1.0 - p.clamp(0.0, 1.0)) / trials as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub mean: f64,
    pub std_dev: f64,
}

/// Asymptotic Kolmogorov distribution tail `P(K > λ)`.
fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=200 {
        let j = j as f64;
        let term = (-2.0 * j * j * lambda * lambda).exp();
        sum += if j as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// KS test of `samples` against a normal law with the sample mean and
/// standard deviation. Uses the Stephens small-sample correction.
pub fn ks_normal_test(samples: &[f64]) -> Option<KsResult> {
    let n = samples.len();
    if n < 2 {
        return None;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let std_dev = var.sqrt();
    if !(std_dev > 0.0) {
        return None;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf(x, mean, std_dev);
            (f - i as f64 / nf).max((i + 1) as f64 / nf - f)
        })
        .fold(0.0, f64::max);
    let root = nf.sqrt();
    let lambda = (root + 0.12 + 0.11 / root) * statistic;
    Some(KsResult {
        statistic,
        p_value: kolmogorov_tail(lambda),
        mean,
        std_dev,
    })
}
