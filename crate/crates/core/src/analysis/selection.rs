use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::frequency::FrequencyTable;
use super::{AnalysisError, Window};
use crate::ingest::NoteEvent;
use crate::notation::Letter;

/// Running relative frequency of a letter right after the event at `time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub time: f64,
    pub value: f64,
}

pub fn stability_trajectory(
    events: &[NoteEvent],
    letter: Letter,
    window: Window,
) -> Result<Vec<TrajectoryPoint>, AnalysisError> {
    stability_trajectory_in(events, letter, &[window])
}

/// Trajectory over the events whose onsets fall in any of `windows`.
pub fn stability_trajectory_in(
    events: &[NoteEvent],
    letter: Letter,
    windows: &[Window],
) -> Result<Vec<TrajectoryPoint>, AnalysisError> {
    let mut hits = 0u64;
    let series: Vec<TrajectoryPoint> = events
        .iter()
        .filter(|e| windows.iter().any(|w| w.contains(e.onset)))
        .enumerate()
        .map(|(i, e)| {
            hits += u64::from(e.note.letter == letter);
            TrajectoryPoint {
                time: e.onset,
                value: hits as f64 / (i + 1) as f64,
            }
        })
        .collect();
    if series.is_empty() {
        let start = windows
            .iter()
            .map(|w| w.start)
            .fold(f64::INFINITY, f64::min);
        let end = windows.iter().map(|w| w.end).fold(0.0, f64::max);
        return Err(AnalysisError::EmptyWindow { start, end });
    }
    Ok(series)
}

/// Earliest time after which the series never leaves the `epsilon` band
/// around its final value. `None` for an empty series.
pub fn stabilization_time(series: &[TrajectoryPoint], epsilon: f64) -> Option<f64> {
    let last = series.last()?;
    let unsettled = series
        .iter()
        .rposition(|p| (p.value - last.value).abs() > epsilon);
    Some(match unsettled {
        Some(i) => series[i + 1].time,
        None => series[0].time,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionConfig {
    /// Minimum relative frequency in every model-holding phase; `None`
    /// means `1/k` with `k` the number of distinct letters observed.
    pub freq_threshold: Option<f64>,
    pub epsilon: f64,
    /// Prefer a Samvadi a fourth or fifth away from the Vadi.
    pub consonance_preference: bool,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            freq_threshold: None,
            epsilon: 0.02,
            consonance_preference: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExclusionReason {
    Tonic,
    LowRelativeFrequency,
    Unstable,
}

impl ExclusionReason {
    pub fn name(self) -> &'static str {
        match self {
            ExclusionReason::Tonic => "tonic",
            ExclusionReason::LowRelativeFrequency => "low-relative-frequency",
            ExclusionReason::Unstable => "unstable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Exclusion {
    pub note: Letter,
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionReport {
    pub threshold: f64,
    /// Letters passing the frequency condition, most stable first.
    pub candidates: Vec<Letter>,
    pub excluded: Vec<Exclusion>,
    pub stabilization: BTreeMap<Letter, f64>,
    pub vadi: Letter,
    pub samvadi: Letter,
    pub interval_semitones: i32,
}

impl SelectionReport {
    pub fn exclusion_of(&self, note: Letter) -> Option<ExclusionReason> {
        self.excluded
            .iter()
            .find(|e| e.note == note)
            .map(|e| e.reason)
    }
}

fn mean_relative(tables: &[FrequencyTable], letter: Letter) -> f64 {
    tables
        .iter()
        .map(|t| t.relative(letter).unwrap_or(0.0))
        .sum::<f64>()
        / tables.len() as f64
}

/// Orders letters by stabilization time, then by higher mean relative
/// frequency, then by scale position.
fn stability_order<'a>(
    tables: &'a [FrequencyTable],
    taus: &BTreeMap<Letter, f64>,
) -> impl Fn(&Letter, &Letter) -> Ordering + 'a {
    let taus = taus.clone();
    move |a, b| {
        let ta = taus.get(a).copied().unwrap_or(f64::INFINITY);
        let tb = taus.get(b).copied().unwrap_or(f64::INFINITY);
        ta.total_cmp(&tb)
            .then_with(|| mean_relative(tables, *b).total_cmp(&mean_relative(tables, *a)))
            .then_with(|| a.cmp(b))
    }
}

/// Picks Vadi and Samvadi from the tables of the phases where the
/// multinomial model holds.
///
/// Sa is never a candidate. Candidates must reach the frequency threshold in
/// every table; the Vadi is the candidate whose trajectory settles first.
/// The Samvadi is the most stable remaining candidate a fourth or fifth from
/// the Vadi, else the most stable remaining candidate, else Sa.
pub fn select_vadi_samvadi(
    holding_tables: &[FrequencyTable],
    trajectories: &BTreeMap<Letter, Vec<TrajectoryPoint>>,
    cfg: &SelectionConfig,
) -> Result<SelectionReport, AnalysisError> {
    let tables: Vec<FrequencyTable> = holding_tables
        .iter()
        .filter(|t| !t.is_empty())
        .cloned()
        .collect();
    if tables.is_empty() {
        return Err(AnalysisError::NoModelHoldingPhase);
    }
    let observed: BTreeSet<Letter> = tables.iter().flat_map(|t| t.letters()).collect();
    let threshold = cfg.freq_threshold.unwrap_or(1.0 / observed.len() as f64);

    let mut excluded = Vec::new();
    let mut candidates = Vec::new();
    for &letter in &observed {
        if letter == Letter::S {
            excluded.push(Exclusion {
                note: letter,
                reason: ExclusionReason::Tonic,
            });
        } else if tables
            .iter()
            .any(|t| t.relative(letter).unwrap_or(0.0) < threshold)
        {
            excluded.push(Exclusion {
                note: letter,
                reason: ExclusionReason::LowRelativeFrequency,
            });
        } else {
            candidates.push(letter);
        }
    }
    if candidates.is_empty() {
        return Err(AnalysisError::NoCandidates { threshold });
    }

    let mut stabilization = BTreeMap::new();
    for (&letter, series) in trajectories {
        if let Some(tau) = stabilization_time(series, cfg.epsilon) {
            stabilization.insert(letter, tau);
        }
    }
    if let Some(&missing) = candidates.iter().find(|l| !stabilization.contains_key(l)) {
        return Err(AnalysisError::MissingTrajectory(missing));
    }

    candidates.sort_by(stability_order(&tables, &stabilization));
    let vadi = candidates[0];
    let rest = &candidates[1..];
    let consonant = rest
        .iter()
        .find(|l| matches!(vadi.interval_to(**l), 5 | 7))
        .filter(|_| cfg.consonance_preference);
    let samvadi = consonant.or(rest.first()).copied().unwrap_or(Letter::S);
    for &l in rest.iter().filter(|l| **l != samvadi) {
        excluded.push(Exclusion {
            note: l,
            reason: ExclusionReason::Unstable,
        });
    }

    Ok(SelectionReport {
        threshold,
        candidates,
        excluded,
        stabilization,
        vadi,
        samvadi,
        interval_semitones: vadi.interval_to(samvadi),
    })
}

/// Ranking by statistical stability: Vadi first, Samvadi second, then every
/// other letter with a stabilization time in stability order.
pub fn statistical_ranks(
    report: &SelectionReport,
    holding_tables: &[FrequencyTable],
) -> Vec<(Letter, u32)> {
    let mut rest: Vec<Letter> = report
        .stabilization
        .keys()
        .copied()
        .filter(|l| *l != report.vadi && *l != report.samvadi)
        .collect();
    rest.sort_by(stability_order(holding_tables, &report.stabilization));
    std::iter::once(report.vadi)
        .chain(std::iter::once(report.samvadi))
        .chain(rest)
        .zip(1..)
        .collect()
}
