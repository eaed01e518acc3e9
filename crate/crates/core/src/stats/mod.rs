//! Statistical building blocks: the multinomial law and its moments,
//! chi-square goodness of fit with pooling of sparse classes, chi-square
//! quantiles, and the Wald–Wolfowitz runs test.

mod chi_square;
mod multinomial;
mod runs;

use thiserror::Error;

pub use chi_square::{
    chi_square_cdf, chi_square_critical, chi_square_gof, ChiClass, ChiSquareResult, GofOptions,
};
pub use multinomial::{multinomial_moments, multinomial_pmf, MultinomialMoments, MultinomialSpec};
pub use runs::{runs_test, RunsResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("probabilities must be non-negative and sum to 1 (sum = {sum})")]
    InvalidProbabilities { sum: f64 },
    #[error("counts sum to {actual}, expected {expected}")]
    CountMismatch { expected: u64, actual: u64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("correlation undefined: class {index} has zero variance")]
    DegenerateVariance { index: usize },
    #[error("need at least two classes, have {0}")]
    TooFewClasses(usize),
    #[error("expected count for class {index} must be positive, got {value}")]
    NonPositiveExpected { index: usize, value: f64 },
    #[error("observed total {observed} and expected total {expected} differ by more than 0.5")]
    TotalMismatch { observed: f64, expected: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("sequence contains only one category")]
    SingleCategory,
    #[error("sequence contains more than two categories")]
    TooManyCategories,
    #[error("sequence of length {0} is too short (need at least 3)")]
    TooShort(usize),
}
