use std::collections::BTreeMap;

use serde::Serialize;

use super::{AnalysisError, Window};
use crate::ingest::NoteEvent;
use crate::notation::Letter;

/// Per-letter counts inside a window, octaves folded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyTable {
    pub window: Window,
    pub counts: BTreeMap<Letter, u64>,
    pub total: u64,
    /// `None` when the window holds no events.
    pub relative: Option<BTreeMap<Letter, f64>>,
}

impl FrequencyTable {
    /// Builds a table from known counts. Zero counts are dropped.
    pub fn from_counts(window: Window, counts: impl IntoIterator<Item = (Letter, u64)>) -> Self {
        let mut map = BTreeMap::new();
        for (letter, c) in counts {
            if c > 0 {
                *map.entry(letter).or_insert(0) += c;
            }
        }
        let total = map.values().sum();
        let relative = (total > 0).then(|| {
            map.iter()
                .map(|(&l, &c)| (l, c as f64 / total as f64))
                .collect()
        });
        Self {
            window,
            counts: map,
            total,
            relative,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn count(&self, letter: Letter) -> u64 {
        self.counts.get(&letter).copied().unwrap_or(0)
    }

    /// Relative frequency of `letter`; zero for an absent letter, `None` for
    /// an empty table.
    pub fn relative(&self, letter: Letter) -> Option<f64> {
        self.relative
            .as_ref()
            .map(|r| r.get(&letter).copied().unwrap_or(0.0))
    }

    /// Letters with a non-zero count, in scale order.
    pub fn letters(&self) -> Vec<Letter> {
        self.counts.keys().copied().collect()
    }
}

pub fn frequency_table(events: &[NoteEvent], window: Window) -> FrequencyTable {
    let counts = events
        .iter()
        .filter(|e| window.contains(e.onset))
        .map(|e| (e.note.letter, 1));
    FrequencyTable::from_counts(window, counts)
}

/// `relative_i × phase_total` for each letter of the reference, in scale order.
pub fn expected_counts(
    reference: &FrequencyTable,
    phase_total: u64,
) -> Result<Vec<f64>, AnalysisError> {
    let relative = reference
        .relative
        .as_ref()
        .ok_or(AnalysisError::EmptyReference)?;
    Ok(relative.values().map(|r| r * phase_total as f64).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecoveredCounts {
    pub total: u64,
    pub counts: Vec<u64>,
}

/// Recovers integer counts behind a list of rounded or truncated relative
/// frequencies: the smallest total `T <= max_total` for which rounding each
/// `relative_i × T` gives counts that sum to `T` and reproduce every
/// relative frequency within `tol`.
pub fn recover_counts(relatives: &[f64], max_total: u64, tol: f64) -> Option<RecoveredCounts> {
    (1..=max_total).find_map(|total| {
        let t = total as f64;
        let counts: Vec<u64> = relatives.iter().map(|r| (r * t).round() as u64).collect();
        let fits = counts.iter().sum::<u64>() == total
            && counts
                .iter()
                .zip(relatives)
                .all(|(&c, &r)| (c as f64 / t - r).abs() <= tol);
        fits.then_some(RecoveredCounts { total, counts })
    })
}
