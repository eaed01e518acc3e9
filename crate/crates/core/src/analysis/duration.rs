use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ingest::NoteEvent;
use crate::notation::Letter;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdConvention {
    /// Divide by `n`.
    #[default]
    Population,
    /// Divide by `n - 1`; a single observation has sd 0.
    Sample,
}

/// Duration summary of one letter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DurationStat {
    pub note: Letter,
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DurationRow {
    pub note: Letter,
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub rank: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DurationTable {
    /// Sorted by rank.
    pub rows: Vec<DurationRow>,
    pub top_nyas: Vec<Letter>,
}

impl DurationTable {
    pub fn rank_of(&self, note: Letter) -> Option<u32> {
        self.rows.iter().find(|r| r.note == note).map(|r| r.rank)
    }
}

// means equal to six decimals count as tied
fn mean_key(mean: f64) -> i64 {
    (mean * 1e6).round() as i64
}

/// Ranks letters by mean duration, longest first. Means equal to six
/// decimals are ordered by the smaller standard deviation.
pub fn rank_duration_stats(stats: &[DurationStat], top_k: usize) -> DurationTable {
    let mut sorted = stats.to_vec();
    sorted.sort_by(|a, b| {
        mean_key(b.mean)
            .cmp(&mean_key(a.mean))
            .then_with(|| a.sd.total_cmp(&b.sd))
            .then_with(|| a.note.cmp(&b.note))
    });
    let rows: Vec<DurationRow> = sorted
        .into_iter()
        .zip(1..)
        .map(|(s, rank)| DurationRow {
            note: s.note,
            count: s.count,
            mean: s.mean,
            sd: s.sd,
            rank,
        })
        .collect();
    let top_nyas = rows.iter().take(top_k).map(|r| r.note).collect();
    DurationTable { rows, top_nyas }
}

pub fn duration_ranking(events: &[NoteEvent], sd: SdConvention, top_k: usize) -> DurationTable {
    let mut by_letter: BTreeMap<Letter, Vec<f64>> = BTreeMap::new();
    for e in events {
        by_letter.entry(e.note.letter).or_default().push(e.duration);
    }
    let stats: Vec<DurationStat> = by_letter
        .into_iter()
        .map(|(note, d)| {
            let n = d.len() as f64;
            let mean = d.iter().sum::<f64>() / n;
            let ss: f64 = d.iter().map(|x| (x - mean).powi(2)).sum();
            let var = match sd {
                SdConvention::Population => ss / n,
                SdConvention::Sample if d.len() > 1 => ss / (n - 1.0),
                SdConvention::Sample => 0.0,
            };
            DurationStat {
                note,
                count: d.len(),
                mean,
                sd: var.sqrt(),
            }
        })
        .collect();
    rank_duration_stats(&stats, top_k)
}
