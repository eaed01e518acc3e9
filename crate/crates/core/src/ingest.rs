//! Pitch-track parsing, note quantization and the note-event CSV format.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::notation::{parse_note, NotationError, NoteToken, SemitoneOffset};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: onset {onset} does not increase on the previous sample")]
    NonMonotonicOnset { line: usize, onset: f64 },
    #[error("line {line}: cannot parse {content:?}")]
    UnparsableLine { line: usize, content: String },
    #[error("no voiced samples in input")]
    EmptyInput,
    #[error("sample at {onset}s ({frequency} Hz) lies outside the three supported octaves")]
    OutOfRange { onset: f64, frequency: f64 },
    #[error("invalid ingest configuration: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {message}")]
    InvalidEvent { line: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One row of a pitch-track export. A frequency of zero marks silence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchSample {
    pub onset: f64,
    pub frequency: f64,
}

impl PitchSample {
    pub fn is_voiced(&self) -> bool {
        self.frequency > 0.0
    }
}

/// A detected note. Onset and duration are in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoteEvent {
    pub note: NoteToken,
    pub onset: f64,
    pub duration: f64,
}

impl NoteEvent {
    pub fn new(note: NoteToken, onset: f64, duration: f64) -> Self {
        Self {
            note,
            onset,
            duration,
        }
    }

    pub fn end(&self) -> f64 {
        self.onset + self.duration
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IngestConfig {
    /// Frequency of the middle-octave Sa.
    pub tonic_hz: f64,
    /// Largest allowed distance from the nearest semitone center.
    pub cents_tolerance: f64,
    /// Runs shorter than this are discarded.
    pub min_duration: f64,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            tonic_hz: 261.63,
            cents_tolerance: 50.0,
            min_duration: 0.02,
        }
    }
}

impl IngestConfig {
    pub fn validate(&self) -> Result<(), IngestError> {
        if !(self.tonic_hz > 0.0 && self.tonic_hz.is_finite()) {
            return Err(IngestError::InvalidConfig(format!(
                "tonic_hz must be positive, got {}",
                self.tonic_hz
            )));
        }
        if !(self.cents_tolerance > 0.0 && self.cents_tolerance <= 100.0) {
            return Err(IngestError::InvalidConfig(format!(
                "cents_tolerance must lie in (0, 100], got {}",
                self.cents_tolerance
            )));
        }
        if self.min_duration.is_nan() || self.min_duration < 0.0 {
            return Err(IngestError::InvalidConfig(format!(
                "min_duration must be non-negative, got {}",
                self.min_duration
            )));
        }
        Ok(())
    }
}

/// Distance of `frequency` above `tonic_hz` in cents.
pub fn cents_above(frequency: f64, tonic_hz: f64) -> f64 {
    1200.0 * (frequency / tonic_hz).log2()
}

/// Parses an `onset frequency` text export; fields may be separated by
/// whitespace or a comma.
pub fn parse_pitch_track<R: Read>(mut reader: R) -> Result<Vec<PitchSample>, IngestError> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    parse_pitch_track_str(&text)
}

pub fn parse_pitch_track_str(text: &str) -> Result<Vec<PitchSample>, IngestError> {
    let mut samples: Vec<PitchSample> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let unparsable = || IngestError::UnparsableLine {
            line: line_no,
            content: raw.to_string(),
        };
        let mut fields = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|f| !f.is_empty());
        let (onset, frequency) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => (
                a.parse::<f64>().map_err(|_| unparsable())?,
                b.parse::<f64>().map_err(|_| unparsable())?,
            ),
            _ => return Err(unparsable()),
        };
        if !onset.is_finite() || onset < 0.0 || !frequency.is_finite() || frequency < 0.0 {
            return Err(unparsable());
        }
        if let Some(prev) = samples.last() {
            if onset <= prev.onset {
                return Err(IngestError::NonMonotonicOnset {
                    line: line_no,
                    onset,
                });
            }
        }
        samples.push(PitchSample { onset, frequency });
    }
    Ok(samples)
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len().is_multiple_of(2) {
        0.5 * (values[mid - 1] + values[mid])
    } else {
        values[mid]
    })
}

/// Median spacing between consecutive samples, used as the frame length.
pub fn median_gap(samples: &[PitchSample]) -> Option<f64> {
    let mut gaps: Vec<f64> = samples
        .windows(2)
        .map(|w| w[1].onset - w[0].onset)
        .collect();
    median(&mut gaps)
}

struct Run {
    offset: i32,
    first: f64,
    last: f64,
}

/// Groups consecutive voiced samples on the same semitone into note events.
///
/// A sample more than `cents_tolerance` away from its nearest semitone
/// center breaks the current run and belongs to no note. Each run spans from
/// its first sample to its last sample plus one median frame; an event is
/// shortened if needed so it never overlaps the next one.
pub fn quantize(
    samples: &[PitchSample],
    cfg: &IngestConfig,
) -> Result<Vec<NoteEvent>, IngestError> {
    cfg.validate()?;
    if !samples.iter().any(PitchSample::is_voiced) {
        return Err(IngestError::EmptyInput);
    }
    let frame = median_gap(samples).unwrap_or(0.0);

    let mut runs: Vec<Run> = Vec::new();
    let mut current: Option<Run> = None;
    for s in samples {
        let assigned = if s.is_voiced() {
            let cents = cents_above(s.frequency, cfg.tonic_hz);
            let offset = (cents / 100.0).round();
            if offset < f64::from(SemitoneOffset::MIN.0)
                || offset > f64::from(SemitoneOffset::MAX.0)
            {
                return Err(IngestError::OutOfRange {
                    onset: s.onset,
                    frequency: s.frequency,
                });
            }
            ((cents - 100.0 * offset).abs() <= cfg.cents_tolerance).then_some(offset as i32)
        } else {
            None
        };
        match (assigned, current.as_mut()) {
            (Some(off), Some(run)) if run.offset == off => run.last = s.onset,
            (Some(off), _) => {
                runs.extend(current.take());
                current = Some(Run {
                    offset: off,
                    first: s.onset,
                    last: s.onset,
                });
            }
            (None, _) => runs.extend(current.take()),
        }
    }
    runs.extend(current.take());

    let mut events = Vec::with_capacity(runs.len());
    for (i, run) in runs.iter().enumerate() {
        let mut duration = run.last + frame - run.first;
        if let Some(next) = runs.get(i + 1) {
            duration = duration.min(next.first - run.first);
        }
        if duration <= 0.0 || duration < cfg.min_duration {
            continue;
        }
        let note = SemitoneOffset(run.offset)
            .to_note()
            .expect("offset range checked above");
        events.push(NoteEvent::new(note, run.first, duration));
    }
    Ok(events)
}

#[derive(Serialize, Deserialize)]
struct EventRow {
    onset: String,
    duration: String,
    note: String,
}

/// Writes the canonical `onset,duration,note` CSV with six decimals.
pub fn write_events_csv<W: Write>(writer: W, events: &[NoteEvent]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    for e in events {
        w.serialize(EventRow {
            onset: format!("{:.6}", e.onset),
            duration: format!("{:.6}", e.duration),
            note: e.note.to_string(),
        })?;
    }
    if events.is_empty() {
        w.write_record(["onset", "duration", "note"])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a note-event CSV, checking ordering and positivity of durations.
pub fn read_events_csv<R: Read>(reader: R) -> Result<Vec<NoteEvent>, IngestError> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.is_empty() {
        // a blank file holds no events
        return Ok(Vec::new());
    }
    if headers.iter().collect::<Vec<_>>() != ["onset", "duration", "note"] {
        return Err(IngestError::InvalidEvent {
            line: 1,
            message: format!("expected header onset,duration,note, found {:?}", headers),
        });
    }
    let mut events: Vec<NoteEvent> = Vec::new();
    for record in r.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let invalid = |message: String| IngestError::InvalidEvent { line, message };
        if record.len() != 3 {
            return Err(invalid(format!(
                "expected 3 fields, found {}",
                record.len()
            )));
        }
        let onset: f64 = record[0]
            .parse()
            .map_err(|_| invalid(format!("bad onset {:?}", &record[0])))?;
        let duration: f64 = record[1]
            .parse()
            .map_err(|_| invalid(format!("bad duration {:?}", &record[1])))?;
        let note = parse_note(&record[2]).map_err(|e: NotationError| invalid(e.to_string()))?;
        if !onset.is_finite() || onset < 0.0 {
            return Err(invalid(format!("onset must be non-negative, got {onset}")));
        }
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(invalid(format!(
                "duration must be positive, got {duration}"
            )));
        }
        if let Some(prev) = events.last() {
            if onset <= prev.onset {
                return Err(invalid(format!(
                    "onset {onset} does not increase on the previous event"
                )));
            }
        }
        events.push(NoteEvent::new(note, onset, duration));
    }
    Ok(events)
}
