use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::stats::ChiSquareResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Observed above expected.
    Shoot,
    /// Observed below expected.
    Drop,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Shoot {
    /// Class label; pooled classes are joined with `+`.
    pub note: String,
    pub direction: Direction,
    pub contribution: f64,
    pub observed: u64,
    pub expected: f64,
}

/// The `top_m` classes contributing most to the statistic of a phase where
/// the model broke down.
pub fn detect_shoots(result: &ChiSquareResult, top_m: usize) -> Result<Vec<Shoot>, AnalysisError> {
    if result.model_holds {
        return Err(AnalysisError::ModelHolds);
    }
    let mut classes: Vec<_> = result.classes.iter().collect();
    classes.sort_by(|a, b| b.contribution.total_cmp(&a.contribution));
    Ok(classes
        .into_iter()
        .take(top_m)
        .map(|c| Shoot {
            note: c.label(),
            direction: if c.deviation() > 0.0 {
                Direction::Shoot
            } else {
                Direction::Drop
            },
            contribution: c.contribution,
            observed: c.observed,
            expected: c.expected,
        })
        .collect())
}
