//! Monte Carlo summary statistics.
//!
//! Per-replicate values are collected in replicate order and reduced with
//! pairwise summation, so the result does not depend on how replicates were
//! scheduled across workers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const PAIRWISE_BLOCK: usize = 8;

pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

pub fn pairwise_sum_complex(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= PAIRWISE_BLOCK {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum_complex(&xs[..mid]) + pairwise_sum_complex(&xs[mid..])
    }
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return MeanEstimate { mean: 0.0, se: 0.0, n };
        }
        let mean = pairwise_sum(xs) / n as f64;
        let se = if n >= 2 {
            let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
            let var = pairwise_sum(&dev) / (n as f64 - 1.0);
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        MeanEstimate { mean, se, n }
    }

    /// Standardized distance of the mean from `expected`. A zero standard
    /// error yields zero for an exact match and infinity otherwise.
    pub fn z(&self, expected: f64) -> f64 {
        z_score(self.mean - expected, self.se)
    }
}

pub fn z_score(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff.abs() <= 1e-300 {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    }
}

/// Real and imaginary parts estimated separately.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexEstimate {
    pub re: MeanEstimate,
    pub im: MeanEstimate,
}

impl ComplexEstimate {
    pub fn from_samples(xs: &[Complex64]) -> Self {
        let re: Vec<f64> = xs.iter().map(|z| z.re).collect();
        let im: Vec<f64> = xs.iter().map(|z| z.im).collect();
        ComplexEstimate {
            re: MeanEstimate::from_samples(&re),
            im: MeanEstimate::from_samples(&im),
        }
    }

    pub fn mean(&self) -> Complex64 {
        Complex64::new(self.re.mean, self.im.mean)
    }

    /// Larger of the two component z-scores in absolute value.
    pub fn max_abs_z(&self, expected: Complex64) -> f64 {
        self.re.z(expected.re).abs().max(self.im.z(expected.im).abs())
    }

    /// Combined standard error `sqrt(se_re^2 + se_im^2)`.
    pub fn se(&self) -> f64 {
        self.re.se.hypot(self.im.se)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_inputs() {
        let xs: Vec<f64> = (0..100).map(|k| k as f64 * 0.25).collect();
        assert_eq!(pairwise_sum(&xs), xs.iter().sum::<f64>());
    }

    #[test]
    fn mean_and_se() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let m = MeanEstimate::from_samples(&xs);
        assert_eq!(m.mean, 2.5);
        // sample sd = sqrt(5/3)
        assert!((m.se - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
        assert!((m.z(2.5)).abs() < 1e-15);
    }

    #[test]
    fn degenerate_z() {
        let m = MeanEstimate::from_samples(&[0.0; 10]);
        assert_eq!(m.z(0.0), 0.0);
        assert!(m.z(1.0).is_infinite());
    }
}
