//! Batch estimates with confidence intervals.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Default normal quantile for 95% intervals.
pub const Z95: f64 = 1.959963984540054;

/// Wilson score interval for `k` successes out of `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(invalid("n", "must be > 0"));
    }
    if k > n {
        return Err(invalid("k", format!("{k} successes exceed {n} trials")));
    }
    if !(z > 0.0 && z.is_finite()) {
        return Err(invalid("z", format!("must be > 0, got {z}")));
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (center + half).min(1.0) };
    Ok((lo, hi))
}

/// Point estimate with standard error and a 95% interval.
///
/// Count estimates carry `k` and use the Wilson interval; mean estimates use
/// the normal interval `point ± 1.96 se`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchEstimate {
    pub n: u64,
    pub k: Option<u64>,
    pub point: f64,
    pub se: f64,
    pub interval: (f64, f64),
}

impl BatchEstimate {
    pub fn from_counts(k: u64, n: u64) -> Result<Self> {
        let interval = wilson_interval(k, n, Z95)?;
        let p = k as f64 / n as f64;
        Ok(Self {
            n,
            k: Some(k),
            point: p,
            se: (p * (1.0 - p) / n as f64).sqrt(),
            interval,
        })
    }

    /// Sample mean and standard error (unbiased variance).
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n == 0 {
            return Err(invalid("n_paths", "must be > 0"));
        }
        let nf = n as f64;
        let mean = samples.iter().sum::<f64>() / nf;
        let var = if n > 1 {
            samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (nf - 1.0)
        } else {
            0.0
        };
        let se = (var / nf).sqrt();
        Ok(Self {
            n: n as u64,
            k: None,
            point: mean,
            se,
            interval: (mean - Z95 * se, mean + Z95 * se),
        })
    }
}

/// Mean of complex samples, estimated componentwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexEstimate {
    pub re: BatchEstimate,
    pub im: BatchEstimate,
}

impl ComplexEstimate {
    pub fn from_samples(samples: &[num_complex::Complex64]) -> Result<Self> {
        let re: Vec<f64> = samples.iter().map(|c| c.re).collect();
        let im: Vec<f64> = samples.iter().map(|c| c.im).collect();
        Ok(Self {
            re: BatchEstimate::from_samples(&re)?,
            im: BatchEstimate::from_samples(&im)?,
        })
    }

    pub fn point(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.point, self.im.point)
    }

    /// Standard error of the modulus of the error, `√(se_re² + se_im²)`.
    pub fn se(&self) -> f64 {
        self.re.se.hypot(self.im.se)
    }

    pub fn modulus(&self) -> f64 {
        self.point().norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(50, 100, 1.96).unwrap();
        assert_abs_diff_eq!(lo, 0.4038, epsilon = 5e-5);
        assert_abs_diff_eq!(hi, 0.5962, epsilon = 5e-5);
        assert_eq!(wilson_interval(0, 100, 1.96).unwrap().0, 0.0);
        let (lo, hi) = wilson_interval(100, 100, 1.96).unwrap();
        assert_eq!(hi, 1.0);
        assert_abs_diff_eq!(lo, 1.0 / (1.0 + 1.96 * 1.96 / 100.0), epsilon = 1e-12);
    }

    #[test]
    fn wilson_rejects_bad_input() {
        assert!(wilson_interval(1, 0, 1.96).is_err());
        assert!(wilson_interval(5, 4, 1.96).is_err());
        assert!(wilson_interval(1, 4, 0.0).is_err());
    }

    #[test]
    fn sample_mean() {
        let e = BatchEstimate::from_samples(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(e.point, 2.5);
        assert_abs_diff_eq!(e.se, (5.0f64 / 3.0 / 4.0).sqrt(), epsilon = 1e-15);
        assert!(e.interval.0 <= e.point && e.point <= e.interval.1);
    }
}
