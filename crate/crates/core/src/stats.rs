//! Small statistical helpers for Monte Carlo checks.

use crate::error::{Error, Result};
use crate::special::gamma_q;

/// Arithmetic mean.
pub fn mean(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::Empty("mean of no values"));
    }
    Ok(xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Unbiased sample variance (zero for a single value).
pub fn variance(xs: &[f64]) -> Result<f64> {
    let m = mean(xs)?;
    if xs.len() < 2 {
        return Ok(0.0);
    }
    Ok(xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64)
}

/// Sorted copy of the sample, for empirical CDF evaluation.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(sample: &[f64]) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::Empty("empirical CDF of no values"));
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    /// Fraction of the sample `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    /// Fraction of the sample `< x`.
    pub fn eval_left(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v < x) as f64 / self.sorted.len() as f64
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Kolmogorov-Smirnov distance to a continuous CDF.
    pub fn ks_distance<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        let n = self.sorted.len() as f64;
        self.sorted
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Standard error of a frequency estimate of probability `p` from `n` trials.
pub fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Pearson chi-square statistic and its upper-tail p-value.
pub fn chi_square(observed: &[u64], expected: &[f64]) -> Result<(f64, f64)> {
    if observed.len() != expected.len() {
        return Err(Error::ShapeMismatch { expected: expected.len(), actual: observed.len() });
    }
    if observed.len() < 2 {
        return Err(Error::Empty("chi-square needs at least two cells"));
    }
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            let diff = o as f64 - e;
            diff * diff / e
        })
        .sum();
    let dof = (observed.len() - 1) as f64;
    Ok((stat, gamma_q(0.5 * dof, 0.5 * stat)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]).unwrap(), 2.0);
        assert_eq!(variance(&[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert!(mean(&[]).is_err());
    }

    #[test]
    fn empirical_cdf() {
        let e = EmpiricalCdf::new(&[3.0, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!(e.eval(2.0), 0.75);
        assert_eq!(e.eval_left(2.0), 0.25);
        assert_eq!(e.eval(0.0), 0.0);
        let ks = EmpiricalCdf::new(&[0.5]).unwrap().ks_distance(|x| x);
        assert_eq!(ks, 0.5);
    }

    #[test]
    fn chi_square_two_cells() {
        // 1 degree of freedom: Q(1/2, s/2) = erfc(sqrt(s/2)).
        let (s, p) = chi_square(&[60, 40], &[50.0, 50.0]).unwrap();
        assert!((s - 4.0).abs() < 1e-12);
        assert!((p - crate::special::erfc(2f64.sqrt())).abs() < 1e-12);
    }
}
