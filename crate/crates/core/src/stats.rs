//! Interval estimates for binomial proportions.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Wilson score interval at 95%, widened if needed so it contains `hits / n`.
pub fn wilson(hits: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = hits as f64 / nf;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = Z95 * libm::sqrt(p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)) / denom;
    let lo = (center - half).max(0.0).min(p);
    let hi = (center + half).min(1.0).max(p);
    (lo, hi)
}

/// Binomial standard deviation of a proportion estimate.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    libm::sqrt(p * (1.0 - p) / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_brackets_the_estimate() {
        for (h, n) in [(0, 10), (10, 10), (3, 10), (500, 1000), (1, 1_000_000)] {
            let (lo, hi) = wilson(h, n);
            let p = h as f64 / n as f64;
            assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
        }
        let (lo, hi) = wilson(10, 10);
        assert_eq!(hi, 1.0);
        assert!(lo < 1.0 && lo > 0.6);
    }

    #[test]
    fn wilson_matches_reference_value() {
        // 50/100: center 0.5, half-width 0.0961...
        let (lo, hi) = wilson(50, 100);
        assert!((lo - 0.403_831_7).abs() < 1e-6, "{lo}");
        assert!((hi - 0.596_168_3).abs() < 1e-6, "{hi}");
    }
}
