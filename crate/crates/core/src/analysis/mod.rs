//! Note-distribution analysis of a single performance: frequency tables per
//! time window, multinomial model checks per phase, Vadi/Samvadi selection by
//! statistical stability, note-duration ranking, rank fusion and outlier
//! ("shoot") flagging in phases where the model breaks.

mod duration;
mod frequency;
mod phases;
mod selection;
mod shoots;
mod universal;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::notation::Letter;
use crate::stats::StatsError;

pub use duration::{
    duration_ranking, rank_duration_stats, DurationRow, DurationStat, DurationTable, SdConvention,
};
pub use frequency::{
    expected_counts, frequency_table, recover_counts, FrequencyTable, RecoveredCounts,
};
pub use phases::{
    phase_model_check, recording_length, ExpectedSource, ModelCheckOptions, PhaseCheck, PhaseScheme,
};
pub use selection::{
    select_vadi_samvadi, stability_trajectory, stability_trajectory_in, stabilization_time,
    statistical_ranks, Exclusion, ExclusionReason, SelectionConfig, SelectionReport,
    TrajectoryPoint,
};
pub use shoots::{detect_shoots, Direction, Shoot};
pub use universal::{universal_rank, universal_ranks, UniversalRank, Weights};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("window [{start}, {end}) contains no events")]
    EmptyWindow { start: f64, end: f64 },
    #[error("reference table is empty")]
    EmptyReference,
    #[error("invalid window [{start}, {end})")]
    InvalidWindow { start: f64, end: f64 },
    #[error("note {0} does not occur in the reference table")]
    LetterNotInReference(Letter),
    #[error("no phase satisfies the multinomial model")]
    NoModelHoldingPhase,
    #[error("no note clears the relative-frequency threshold {threshold}")]
    NoCandidates { threshold: f64 },
    #[error("no stability trajectory supplied for candidate {0}")]
    MissingTrajectory(Letter),
    #[error("rank weights must be positive (got {w1}, {w2})")]
    NonPositiveWeight { w1: f64, w2: f64 },
    #[error("the model holds in this phase; shoots are only flagged where it breaks")]
    ModelHolds,
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Half-open time interval `[start, end)` in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub start: f64,
    pub end: f64,
}

impl Window {
    pub fn new(start: f64, end: f64) -> Result<Self, AnalysisError> {
        if !(start.is_finite() && end.is_finite() && start >= 0.0 && start < end) {
            return Err(AnalysisError::InvalidWindow { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t < self.end
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}
