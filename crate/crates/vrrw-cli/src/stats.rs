//! Small statistics helpers for the Monte Carlo summaries.

/// Wilson 95% score interval for a binomial proportion.
pub fn wilson_interval(hits: u64, n: u64) -> (f64, f64) {
    assert!(n > 0 && hits <= n);
    let z = 1.959963984540054; // 97.5% normal quantile
    let n_f = n as f64;
    let p_hat = hits as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p_hat + z2 / (2.0 * n_f)) / denom;
    let half = z * (p_hat * (1.0 - p_hat) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// One-sample Kolmogorov-Smirnov statistic against Uniform[0, 1].
pub fn ks_statistic_uniform(samples: &[f64]) -> f64 {
    assert!(!samples.is_empty());
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let upper = (i + 1) as f64 / n - x;
        let lower = x - i as f64 / n;
        d = d.max(upper).max(lower);
    }
    d
}

pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_endpoints() {
        // Zero hits pin the lower endpoint at 0, full hits the upper at 1.
        let (low, high) = wilson_interval(0, 100);
        assert_eq!(low, 0.0);
        assert!(high > 0.0 && high < 0.1);
        let (low, high) = wilson_interval(100, 100);
        assert!((high - 1.0).abs() < 1e-15);
        assert!(low > 0.9);
        // The interval always contains the point estimate.
        for (k, n) in [(10u64, 200u64), (1, 7), (33, 40)] {
            let (low, high) = wilson_interval(k, n);
            let p = k as f64 / n as f64;
            assert!(low <= p && p <= high);
            assert!((0.0..=1.0).contains(&low) && (0.0..=1.0).contains(&high));
        }
    }

    #[test]
    fn ks_by_hand() {
        // Samples {0.1, 0.2, 0.3}: the empirical CDF jumps to 1 at 0.3,
        // so the gap 1 - 0.3 = 0.7 dominates.
        let d = ks_statistic_uniform(&[0.1, 0.2, 0.3]);
        assert!((d - 0.7).abs() < 1e-15);
        // A perfectly spread sample has statistic 1/(2n).
        let d = ks_statistic_uniform(&[0.125, 0.375, 0.625, 0.875]);
        assert!((d - 0.125).abs() < 1e-15);
    }

    #[test]
    fn median_by_hand() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
