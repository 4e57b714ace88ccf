//! Sample summaries used by every estimator.

use serde::Serialize;

/// 97.5% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Mean and standard error of `xs` (sample sd with `n - 1`, over `sqrt(n)`).
///
/// The mean is accumulated relative to the first value, so identical inputs
/// give exactly that value and a standard error of exactly zero.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let x0 = xs[0];
    let shift: f64 = xs.iter().map(|x| x - x0).sum::<f64>() / n as f64;
    let mean = x0 + shift;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt())
}

/// Wilson score interval at 95% for `successes` out of `n`.
pub fn wilson(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = Z95 * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    let lo = (centre - half).max(0.0).min(p);
    let hi = (centre + half).min(1.0).max(p);
    (lo, hi)
}

/// A Monte Carlo estimate. Wilson bounds are present for Bernoulli data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replicas: u64,
    pub wilson_low: Option<f64>,
    pub wilson_high: Option<f64>,
}

impl McEstimate {
    pub fn bernoulli(outcomes: &[bool]) -> Self {
        let n = outcomes.len() as u64;
        let k = outcomes.iter().filter(|&&b| b).count() as u64;
        let p = if n == 0 { 0.0 } else { k as f64 / n as f64 };
        let se = if n == 0 { 0.0 } else { (p * (1.0 - p) / n as f64).sqrt() };
        let (lo, hi) = wilson(k, n);
        McEstimate {
            mean: p,
            std_error: se,
            replicas: n,
            wilson_low: Some(lo),
            wilson_high: Some(hi),
        }
    }

    pub fn real(values: &[f64]) -> Self {
        let (mean, se) = mean_and_se(values);
        McEstimate {
            mean,
            std_error: se,
            replicas: values.len() as u64,
            wilson_low: None,
            wilson_high: None,
        }
    }
}

/// Sample covariance of paired data and the standard error of that estimate
/// (sd of the centred products over `sqrt(n)`).
pub fn covariance_and_se(f: &[f64], g: &[f64]) -> (f64, f64) {
    assert_eq!(f.len(), g.len());
    let n = f.len();
    if n < 2 {
        return (0.0, 0.0);
    }
    let (mf, _) = mean_and_se(f);
    let (mg, _) = mean_and_se(g);
    let products: Vec<f64> = f.iter().zip(g).map(|(a, b)| (a - mf) * (b - mg)).collect();
    let (mp, se) = mean_and_se(&products);
    (mp * n as f64 / (n - 1) as f64, se)
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sample_has_zero_se() {
        let xs = vec![0.1 + 0.2; 37];
        let (m, se) = mean_and_se(&xs);
        assert_eq!(m, 0.1 + 0.2);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn wilson_contains_estimate() {
        for (k, n) in [(0, 10), (10, 10), (3, 10), (500, 1000), (1, 100_000)] {
            let (lo, hi) = wilson(k, n);
            let p = k as f64 / n as f64;
            assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
        }
        // textbook value: 50/100 -> (0.4038, 0.5962)
        let (lo, hi) = wilson(50, 100);
        assert!((lo - 0.4038).abs() < 1e-4 && (hi - 0.5962).abs() < 1e-4);
    }

    #[test]
    fn slope_of_a_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        assert!((ls_slope(&xs, &ys) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn covariance_of_identical_vectors_is_variance() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let (c, _) = covariance_and_se(&xs, &xs);
        let m = 3.75;
        let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 3.0;
        assert!((c - var).abs() < 1e-12);
    }
}
