//! Small statistics toolbox: sample moments, Kolmogorov-Smirnov tests
//! against reference distributions, and binomial standard errors.

use statrs::distribution::{ContinuousCDF, Normal};

/// Sample mean and (population, `/n`) variance.
pub fn mean_var(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var)
}

/// Standard error of the mean.
pub fn std_err(samples: &[f64]) -> f64 {
    let (_, var) = mean_var(samples);
    (var / samples.len() as f64).sqrt()
}

/// One-sample KS statistic against a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Asymptotic p-value for the one-sample KS statistic `d` with `n` samples
/// (Stephens' small-sample correction, then the Kolmogorov series).
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-8 {
        return 1.0;
    }
    let mut p = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = sign * (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        p += term;
        sign = -sign;
        if term.abs() < 1e-12 {
            break;
        }
    }
    (2.0 * p).clamp(0.0, 1.0)
}

/// KS test against Exponential(rate).
pub fn ks_test_exponential(samples: &[f64], rate: f64) -> (f64, f64) {
    let d = ks_statistic(samples, |x| if x <= 0.0 { 0.0 } else { 1.0 - (-rate * x).exp() });
    (d, ks_p_value(d, samples.len()))
}

/// KS test against Normal(mean, variance).
pub fn ks_test_normal(samples: &[f64], mean: f64, variance: f64) -> (f64, f64) {
    if variance <= 0.0 {
        return (1.0, 0.0);
    }
    let normal = Normal::new(mean, variance.sqrt()).expect("valid normal");
    let d = ks_statistic(samples, |x| normal.cdf(x));
    (d, ks_p_value(d, samples.len()))
}

/// Binomial standard error of an empirical proportion.
pub fn binomial_std_err(p_hat: f64, n: usize) -> f64 {
    (p_hat * (1.0 - p_hat) / n as f64).sqrt()
}
