//! Binomial proportion estimates.

use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub failures: u64,
    pub trials: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl RateEstimate {
    pub fn from_counts(failures: u64, trials: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(failures, trials, Z95);
        let estimate = if trials == 0 {
            0.0
        } else {
            failures as f64 / trials as f64
        };
        Self {
            failures,
            trials,
            estimate,
            ci_low,
            ci_high,
        }
    }

    pub fn overlaps(&self, other: &RateEstimate) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let low = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if successes >= trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (low, high)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_failures() {
        let r = RateEstimate::from_counts(0, 100);
        assert_eq!(r.estimate, 0.0);
        assert_eq!(r.ci_low, 0.0);
        // z²/(n + z²)
        assert_abs_diff_eq!(r.ci_high, Z95 * Z95 / (100.0 + Z95 * Z95), epsilon = 1e-15);
    }

    #[test]
    fn symmetric_half() {
        let (lo, hi) = wilson_interval(50, 100, Z95);
        assert_abs_diff_eq!(lo + hi, 1.0, epsilon = 1e-12);
        // reference value 0.40383 .. 0.59617
        assert_abs_diff_eq!(lo, 0.403_831_5, epsilon = 1e-6);
    }
}
