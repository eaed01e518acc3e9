//! Melodic contour statistics over consecutive note triples, and the
//! inter-onset-interval series.
//!
//! Every consecutive triple of pitches `(a, b, c)` (semitone offsets, octave
//! included) falls in exactly one bucket:
//!
//! | pattern                      | bucket  |
//! |------------------------------|---------|
//! | `a = b = c`                  | none    |
//! | `a < b < c`                  | rising  |
//! | `a > b > c`                  | falling |
//! | exactly one of `a = b`, `b = c` | mixed |
//! | `a < b > c`                  | hat     |
//! | `a > b < c`                  | valley  |
//!
//! Rising triples are convex when the second step is larger than the first,
//! concave when smaller and linear when equal. Falling triples take the
//! shape of their mirror image, so a descent that slows down is concave.

use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::ingest::NoteEvent;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapeError {
    #[error("need at least {needed} events, got {got}")]
    TooShort { needed: usize, got: usize },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ShapeBreakdown {
    pub convex: usize,
    pub concave: usize,
    pub linear: usize,
}

impl ShapeBreakdown {
    pub fn total(&self) -> usize {
        self.convex + self.concave + self.linear
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TransitionSummary {
    pub rising: usize,
    pub falling: usize,
    pub mixed: usize,
    pub none: usize,
    pub rising_shape: ShapeBreakdown,
    pub falling_shape: ShapeBreakdown,
}

impl TransitionSummary {
    pub fn total(&self) -> usize {
        self.rising + self.falling + self.mixed + self.none
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SkewBreakdown {
    /// First arm shorter than the second.
    pub positive: usize,
    /// First arm longer than the second.
    pub negative: usize,
    pub symmetric: usize,
}

/// Magnitude classes: low/shallow, moderate, high/deep.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MagnitudeBreakdown {
    pub small: usize,
    pub moderate: usize,
    pub large: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct HatValleySummary {
    pub hats: usize,
    pub valleys: usize,
    pub hat_skew: SkewBreakdown,
    pub valley_skew: SkewBreakdown,
    pub hat_height: MagnitudeBreakdown,
    pub valley_depth: MagnitudeBreakdown,
}

/// Arm-length limits in semitones for the magnitude classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ShapeThresholds {
    /// Largest arm still counted as low/shallow.
    pub small_max: i32,
    /// Largest arm still counted as moderate.
    pub moderate_max: i32,
}

impl Default for ShapeThresholds {
    fn default() -> Self {
        Self {
            small_max: 2,
            moderate_max: 6,
        }
    }
}

fn pitches(events: &[NoteEvent]) -> Vec<i32> {
    events
        .iter()
        .map(|e| e.note.semitone_offset().value())
        .collect()
}

fn require(len: usize, needed: usize) -> Result<(), ShapeError> {
    if len < needed {
        return Err(ShapeError::TooShort { needed, got: len });
    }
    Ok(())
}

fn shape(first: i32, second: i32, breakdown: &mut ShapeBreakdown) {
    match (second - first).signum() {
        1 => breakdown.convex += 1,
        -1 => breakdown.concave += 1,
        _ => breakdown.linear += 1,
    }
}

pub fn classify_transitions(events: &[NoteEvent]) -> Result<TransitionSummary, ShapeError> {
    classify_transition_pitches(&pitches(events))
}

pub fn classify_transition_pitches(p: &[i32]) -> Result<TransitionSummary, ShapeError> {
    require(p.len(), 3)?;
    let mut s = TransitionSummary::default();
    for w in p.windows(3) {
        let (up, down) = (w[1] - w[0], w[2] - w[1]);
        match (up.signum(), down.signum()) {
            (0, 0) => s.none += 1,
            (1, 1) => {
                s.rising += 1;
                shape(up, down, &mut s.rising_shape);
            }
            (-1, -1) => {
                s.falling += 1;
                shape(-up, -down, &mut s.falling_shape);
            }
            (0, _) | (_, 0) => s.mixed += 1,
            _ => {} // hats and valleys
        }
    }
    Ok(s)
}

pub fn classify_hats_valleys(
    events: &[NoteEvent],
    thresholds: ShapeThresholds,
) -> Result<HatValleySummary, ShapeError> {
    classify_hat_valley_pitches(&pitches(events), thresholds)
}

pub fn classify_hat_valley_pitches(
    p: &[i32],
    thresholds: ShapeThresholds,
) -> Result<HatValleySummary, ShapeError> {
    require(p.len(), 3)?;
    let mut s = HatValleySummary::default();
    for w in p.windows(3) {
        let (first, second) = (w[1] - w[0], w[2] - w[1]);
        let is_hat = first > 0 && second < 0;
        let is_valley = first < 0 && second > 0;
        if !(is_hat || is_valley) {
            continue;
        }
        let (a1, a2) = (first.abs(), second.abs());
        let (skew, magnitude) = if is_hat {
            s.hats += 1;
            (&mut s.hat_skew, &mut s.hat_height)
        } else {
            s.valleys += 1;
            (&mut s.valley_skew, &mut s.valley_depth)
        };
        match a1.cmp(&a2) {
            std::cmp::Ordering::Equal => skew.symmetric += 1,
            std::cmp::Ordering::Less => skew.positive += 1,
            std::cmp::Ordering::Greater => skew.negative += 1,
        }
        let m = a1.max(a2);
        if m <= thresholds.small_max {
            magnitude.small += 1;
        } else if m <= thresholds.moderate_max {
            magnitude.moderate += 1;
        } else {
            magnitude.large += 1;
        }
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IoiPair {
    /// Serial number of the note pair, starting at 1.
    pub index: usize,
    pub interval: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IoiSeries {
    pub pairs: Vec<IoiPair>,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// All intervals equal within the tolerance.
    pub rhythmic: bool,
}

/// Default spread allowed between the shortest and longest interval.
pub const DEFAULT_RHYTHM_TOLERANCE: f64 = 0.010;

pub fn ioi_series(events: &[NoteEvent], tolerance: f64) -> Result<IoiSeries, ShapeError> {
    require(events.len(), 2)?;
    let pairs: Vec<IoiPair> = events
        .windows(2)
        .enumerate()
        .map(|(i, w)| IoiPair {
            index: i + 1,
            interval: w[1].onset - w[0].onset,
        })
        .collect();
    let min = pairs
        .iter()
        .map(|p| p.interval)
        .fold(f64::INFINITY, f64::min);
    let max = pairs
        .iter()
        .map(|p| p.interval)
        .fold(f64::NEG_INFINITY, f64::max);
    let mean = pairs.iter().map(|p| p.interval).sum::<f64>() / pairs.len() as f64;
    Ok(IoiSeries {
        // tiny slack so that intervals equal up to rounding still count
        rhythmic: max - min <= tolerance + 1e-9,
        pairs,
        min,
        max,
        mean,
    })
}

pub fn write_ioi_csv<W: Write>(writer: W, series: &IoiSeries) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["index", "interval_seconds"])?;
    for p in &series.pairs {
        w.write_record([p.index.to_string(), format!("{:.6}", p.interval)])?;
    }
    w.flush()?;
    Ok(())
}

/// Line chart of the series: note-pair serial number against interval.
pub fn render_ioi_svg(series: &IoiSeries, title: &str) -> String {
    const W: f64 = 800.0;
    const H: f64 = 400.0;
    const LEFT: f64 = 70.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 40.0;
    const BOTTOM: f64 = 60.0;
    let plot_w = W - LEFT - RIGHT;
    let plot_h = H - TOP - BOTTOM;
    let n = series.pairs.len();
    let x_max = n.max(2) as f64;
    let y_max = if series.max > 0.0 {
        series.max * 1.05
    } else {
        1.0
    };
    let x = |i: usize| LEFT + (i as f64 - 1.0) / (x_max - 1.0) * plot_w;
    let y = |v: f64| TOP + plot_h - v / y_max * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">
<rect width="{W}" height="{H}" fill="white"/>
<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        W / 2.0,
        xml_escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/>
<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{b}" stroke="black"/>"#,
        b = TOP + plot_h,
        r = LEFT + plot_w
    );
    for k in 0..=4 {
        let v = y_max * k as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="11">{:.3}</text>"#,
            LEFT - 6.0,
            y(v) + 4.0,
            v
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">Serial number of successive note pair</text>
<text x="18" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 {})">Inter-onset interval (s)</text>"#,
        LEFT + plot_w / 2.0,
        H - 18.0,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    let points: Vec<String> = series
        .pairs
        .iter()
        .map(|p| format!("{:.2},{:.2}", x(p.index), y(p.interval)))
        .collect();
    let _ = writeln!(
        svg,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#,
        points.join(" ")
    );
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
