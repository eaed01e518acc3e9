use serde::Serialize;
use statrs::function::factorial::ln_factorial;

use super::StatsError;

const PROB_SUM_TOL: f64 = 1e-9;

/// `n` independent trials, each landing in one of `probs.len()` classes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultinomialSpec {
    n: u64,
    probs: Vec<f64>,
}

impl MultinomialSpec {
    pub fn new(n: u64, probs: Vec<f64>) -> Result<Self, StatsError> {
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(StatsError::InvalidProbabilities { sum });
        }
        Ok(Self { n, probs })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn k(&self) -> usize {
        self.probs.len()
    }
}

/// Probability of observing exactly the counts `x`, evaluated in log space.
pub fn multinomial_pmf(spec: &MultinomialSpec, x: &[u64]) -> Result<f64, StatsError> {
    if x.len() != spec.k() {
        return Err(StatsError::DimensionMismatch {
            left: spec.k(),
            right: x.len(),
        });
    }
    let total: u64 = x.iter().sum();
    if total != spec.n {
        return Err(StatsError::CountMismatch {
            expected: spec.n,
            actual: total,
        });
    }
    let mut log_p = ln_factorial(spec.n);
    for (&xi, &pi) in x.iter().zip(&spec.probs) {
        if xi == 0 {
            continue;
        }
        if pi == 0.0 {
            return Ok(0.0);
        }
        log_p += xi as f64 * pi.ln() - ln_factorial(xi);
    }
    Ok(log_p.exp())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultinomialMoments {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    /// Full covariance matrix; the diagonal holds the variances.
    pub covariance: Vec<Vec<f64>>,
}

impl MultinomialMoments {
    /// Correlation between classes `i` and `j`.
    pub fn correlation_between(&self, i: usize, j: usize) -> Result<f64, StatsError> {
        let k = self.variance.len();
        if i >= k || j >= k {
            return Err(StatsError::DimensionMismatch {
                left: k,
                right: i.max(j) + 1,
            });
        }
        if i == j {
            return Ok(1.0);
        }
        for idx in [i, j] {
            if self.variance[idx] <= 0.0 {
                return Err(StatsError::DegenerateVariance { index: idx });
            }
        }
        Ok(self.covariance[i][j] / (self.variance[i] * self.variance[j]).sqrt())
    }

    /// Full correlation matrix; fails if any class has zero variance.
    pub fn correlation(&self) -> Result<Vec<Vec<f64>>, StatsError> {
        let k = self.variance.len();
        (0..k)
            .map(|i| (0..k).map(|j| self.correlation_between(i, j)).collect())
            .collect()
    }
}

pub fn multinomial_moments(spec: &MultinomialSpec) -> MultinomialMoments {
    let n = spec.n as f64;
    let p = &spec.probs;
    let mean = p.iter().map(|pi| n * pi).collect();
    let variance: Vec<f64> = p.iter().map(|pi| n * pi * (1.0 - pi)).collect();
    let covariance = (0..p.len())
        .map(|i| {
            (0..p.len())
                .map(|j| {
                    if i == j {
                        variance[i]
                    } else {
                        -n * p[i] * p[j]
                    }
                })
                .collect()
        })
        .collect();
    MultinomialMoments {
        mean,
        variance,
        covariance,
    }
}
