//! Standard-normal helpers and the one-sample Kolmogorov-Smirnov statistic.

use std::f64::consts::SQRT_2;

/// Standard normal CDF Φ(x), accurate to double precision via `erfc`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal survival function 1 - Φ(x), stable in the upper tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// One-sample Kolmogorov-Smirnov statistic of `sample` against a CDF.
///
/// D_n = sup_x |F_n(x) - F(x)| computed from the exact discrete formula
/// D_n = max_i max(i/n - F(x_(i)), F(x_(i)) - (i-1)/n). For a single
/// observation this reduces to max(F(z), 1 - F(z)).
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    assert!(!sample.is_empty(), "KS statistic needs a nonempty sample");
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("non-finite value in KS sample"));
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let fx = cdf(x);
        let upper = (i as f64 + 1.0) / n - fx;
        let lower = fx - i as f64 / n;
        d = d.max(upper).max(lower);
    }
    d
}

/// Binomial standard error sqrt(p(1-p)/n) of an empirical frequency.
pub fn binomial_se(p: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}
