//! Small statistical helpers: sample summaries and Kolmogorov-Smirnov tests
//! used by the Monte Carlo diagnostics and the sampler cross-checks.

use statrs::distribution::{ContinuousCDF, Normal};

/// Sample mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    assert!(n >= 2, "need at least two samples");
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    assert!(n >= 2);
    let mean = xs.iter().sum::<f64>() / n as f64;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0)
}

/// Survival function of the Kolmogorov distribution,
/// `Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS test against a CDF. Returns `(statistic, p_value)` using the
/// asymptotic Kolmogorov law with the Stephens small-sample correction.
pub fn ks_test_cdf<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> (f64, f64) {
    let n = samples.len();
    assert!(n >= 8, "KS test needs a reasonable sample size");
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let nf = n as f64;
    let mut d = 0.0f64;
    for (i, x) in xs.iter().enumerate() {
        let f = cdf(*x);
        let hi = (i as f64 + 1.0) / nf - f;
        let lo = f - i as f64 / nf;
        d = d.max(hi).max(lo);
    }
    let corrected = (nf.sqrt() + 0.12 + 0.11 / nf.sqrt()) * d;
    (d, kolmogorov_sf(corrected))
}

/// Two-sample KS test; returns `(statistic, p_value)`.
pub fn ks_test_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    assert!(a.len() >= 8 && b.len() >= 8);
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|u, v| u.partial_cmp(v).unwrap());
    ys.sort_by(|u, v| u.partial_cmp(v).unwrap());
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let x = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let n_eff = na * nb / (na + nb);
    let corrected = (n_eff.sqrt() + 0.12 + 0.11 / n_eff.sqrt()) * d;
    (d, kolmogorov_sf(corrected))
}

/// Standard normal CDF with the given mean and standard deviation.
pub fn normal_cdf(mean: f64, std_dev: f64) -> impl Fn(f64) -> f64 {
    let dist = Normal::new(mean, std_dev).expect("valid normal parameters");
    move |x| dist.cdf(x)
}
