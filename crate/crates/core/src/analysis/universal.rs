use serde::Serialize;

use super::duration::DurationTable;
use super::AnalysisError;
use crate::notation::Letter;

/// Weights of the statistical-stability rank and the duration rank.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Weights {
    pub statistical: f64,
    pub psychological: f64,
}

impl Default for Weights {
    /// Statistical stability weighted higher, as suited to Vadi detection.
    fn default() -> Self {
        Self {
            statistical: 2.0,
            psychological: 1.0,
        }
    }
}

impl Weights {
    /// Duration rank weighted higher, as suited to stay-note detection.
    pub fn for_nyas() -> Self {
        Self {
            statistical: 1.0,
            psychological: 2.0,
        }
    }
}

/// Weighted mean of two ranks.
pub fn universal_rank(
    rank_stat: f64,
    rank_psych: f64,
    w1: f64,
    w2: f64,
) -> Result<f64, AnalysisError> {
    if !(w1 > 0.0 && w2 > 0.0) {
        return Err(AnalysisError::NonPositiveWeight { w1, w2 });
    }
    Ok((rank_stat * w1 + rank_psych * w2) / (w1 + w2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniversalRank {
    pub note: Letter,
    pub statistical: u32,
    pub psychological: u32,
    pub universal: f64,
}

/// Fuses the two rankings for every letter present in both, best first.
pub fn universal_ranks(
    statistical: &[(Letter, u32)],
    durations: &DurationTable,
    weights: Weights,
) -> Result<Vec<UniversalRank>, AnalysisError> {
    let mut out = Vec::new();
    for &(note, stat) in statistical {
        let Some(psych) = durations.rank_of(note) else {
            continue;
        };
        out.push(UniversalRank {
            note,
            statistical: stat,
            psychological: psych,
            universal: universal_rank(
                f64::from(stat),
                f64::from(psych),
                weights.statistical,
                weights.psychological,
            )?,
        });
    }
    out.sort_by(|a, b| {
        a.universal
            .total_cmp(&b.universal)
            .then(a.statistical.cmp(&b.statistical))
    });
    Ok(out)
}
