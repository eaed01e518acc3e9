//! End-to-end analysis of an event list and the text, JSON and CSV renderings
//! of the result.

use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::analysis::{
    duration_ranking, frequency_table, phase_model_check, recording_length, select_vadi_samvadi,
    stability_trajectory_in, statistical_ranks, universal_ranks, AnalysisError, Direction,
    DurationTable, FrequencyTable, ModelCheckOptions, SelectionReport, Shoot, UniversalRank,
    Window,
};
use crate::config::{AnalysisConfig, OutputFormat};
use crate::ingest::NoteEvent;
use crate::melody::{
    classify_hats_valleys, classify_transitions, ioi_series, HatValleySummary, TransitionSummary,
};
use crate::notation::Letter;
use crate::stats::ChiSquareResult;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no events to analyze")]
    NoEvents,
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("failed to write report: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to serialize report: {0}")]
    Json(#[from] serde_json::Error),
    #[error("failed to write csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub events: usize,
    pub recording_length: f64,
    pub distinct_notes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tables {
    pub overall: FrequencyTable,
    pub phases: Vec<FrequencyTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectedCount {
    pub note: Letter,
    pub observed: u64,
    pub expected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseTest {
    /// 1-based phase number.
    pub phase: usize,
    pub window: Window,
    pub expected: Vec<ExpectedCount>,
    pub model_holds: bool,
    pub result: Option<ChiSquareResult>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SelectionOutcome {
    Selected(SelectionReport),
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseShoots {
    pub phase: usize,
    pub shoots: Vec<Shoot>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IoiSummary {
    pub intervals: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub rhythmic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub config: AnalysisConfig,
    pub summary: Summary,
    pub tables: Tables,
    pub chi_square: Vec<PhaseTest>,
    pub selection: SelectionOutcome,
    pub durations: DurationTable,
    pub universal_ranks: Vec<UniversalRank>,
    pub shoots: Vec<PhaseShoots>,
    pub transitions: Option<TransitionSummary>,
    pub hats_valleys: Option<HatValleySummary>,
    pub ioi: Option<IoiSummary>,
}

/// Runs every analysis on `events` (sorted by onset).
pub fn analyze(events: &[NoteEvent], cfg: &AnalysisConfig) -> Result<Report, ReportError> {
    if events.is_empty() {
        return Err(ReportError::NoEvents);
    }
    let length = recording_length(events);
    let overall = frequency_table(events, Window::new(events[0].onset.min(0.0), length)?);
    let opts = ModelCheckOptions {
        gof: cfg.gof(),
        expected_source: cfg.expected_source,
    };
    let checks = phase_model_check(events, &cfg.phase_scheme(), &overall, &opts)?;

    let holding: Vec<&FrequencyTable> = checks
        .iter()
        .filter(|c| c.model_holds())
        .map(|c| &c.table)
        .collect();
    let holding_tables: Vec<FrequencyTable> = holding.iter().map(|t| (*t).clone()).collect();
    let holding_windows: Vec<Window> = holding.iter().map(|t| t.window).collect();

    let durations = duration_ranking(events, cfg.sd_convention, cfg.top_nyas);

    let selection = select(events, &overall, &holding_tables, &holding_windows, cfg);
    let universal = match &selection {
        Ok(sel) => universal_ranks(
            &statistical_ranks(sel, &holding_tables),
            &durations,
            cfg.weights,
        )?,
        Err(_) => Vec::new(),
    };

    let mut shoots = Vec::new();
    for (i, c) in checks.iter().enumerate() {
        if let Ok(result) = &c.test {
            if !result.model_holds {
                shoots.push(PhaseShoots {
                    phase: i + 1,
                    shoots: crate::analysis::detect_shoots(result, cfg.shoots)?,
                });
            }
        }
    }

    let chi_square = checks
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let basis = match cfg.expected_source {
                crate::analysis::ExpectedSource::Overall => &overall,
                crate::analysis::ExpectedSource::Phase => &c.table,
            };
            PhaseTest {
                phase: i + 1,
                window: c.window,
                expected: basis
                    .letters()
                    .into_iter()
                    .zip(&c.expected)
                    .map(|(note, &expected)| ExpectedCount {
                        note,
                        observed: c.table.count(note),
                        expected,
                    })
                    .collect(),
                model_holds: c.model_holds(),
                result: c.test.as_ref().ok().cloned(),
                error: c.test.as_ref().err().map(ToString::to_string),
            }
        })
        .collect();

    let ioi = ioi_series(events, cfg.rhythm_tolerance)
        .ok()
        .map(|s| IoiSummary {
            intervals: s.pairs.len(),
            min: s.min,
            max: s.max,
            mean: s.mean,
            rhythmic: s.rhythmic,
        });

    Ok(Report {
        config: cfg.clone(),
        summary: Summary {
            events: events.len(),
            recording_length: length,
            distinct_notes: overall.counts.len(),
        },
        tables: Tables {
            phases: checks.iter().map(|c| c.table.clone()).collect(),
            overall,
        },
        chi_square,
        selection: match selection {
            Ok(s) => SelectionOutcome::Selected(s),
            Err(e) => SelectionOutcome::Failed {
                error: e.to_string(),
            },
        },
        durations,
        universal_ranks: universal,
        shoots,
        transitions: classify_transitions(events).ok(),
        hats_valleys: classify_hats_valleys(events, cfg.shape_thresholds).ok(),
        ioi,
    })
}

fn select(
    events: &[NoteEvent],
    overall: &FrequencyTable,
    holding_tables: &[FrequencyTable],
    holding_windows: &[Window],
    cfg: &AnalysisConfig,
) -> Result<SelectionReport, AnalysisError> {
    if holding_tables.iter().all(FrequencyTable::is_empty) {
        return Err(AnalysisError::NoModelHoldingPhase);
    }
    let mut trajectories = std::collections::BTreeMap::new();
    for letter in overall.letters() {
        let series = stability_trajectory_in(events, letter, holding_windows)?;
        trajectories.insert(letter, series);
    }
    select_vadi_samvadi(holding_tables, &trajectories, &cfg.selection())
}

impl Report {
    pub fn write<W: Write>(&self, format: OutputFormat, out: W) -> Result<(), ReportError> {
        match format {
            OutputFormat::Json => self.write_json(out),
            OutputFormat::Text => self.write_text(out),
            OutputFormat::Csv => self.write_csv(out),
        }
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<(), ReportError> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        Ok(())
    }

    pub fn write_text<W: Write>(&self, mut out: W) -> Result<(), ReportError> {
        out.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} events over {:.3} s, {} distinct notes, phases: {}",
            self.summary.events,
            self.summary.recording_length,
            self.summary.distinct_notes,
            self.config.phase_scheme().name()
        );

        s.push_str("\nNote frequencies\n");
        let _ = write!(s, "{:<6}{:>10}", "note", "overall");
        for i in 1..=self.tables.phases.len() {
            let _ = write!(s, "{:>10}", format!("phase {i}"));
        }
        s.push('\n');
        for letter in self.tables.overall.letters() {
            let _ = write!(s, "{:<6}{:>10}", letter, self.tables.overall.count(letter));
            for t in &self.tables.phases {
                let _ = write!(s, "{:>10}", t.count(letter));
            }
            s.push('\n');
        }
        let _ = write!(s, "{:<6}{:>10}", "total", self.tables.overall.total);
        for t in &self.tables.phases {
            let _ = write!(s, "{:>10}", t.total);
        }
        s.push('\n');

        for test in &self.chi_square {
            let _ = writeln!(
                s,
                "\nPhase {} [{:.3}, {:.3})",
                test.phase, test.window.start, test.window.end
            );
            match (&test.result, &test.error) {
                (Some(r), _) => {
                    let _ = writeln!(
                        s,
                        "{:<8}{:>6}{:>12}{:>12}{:>12}",
                        "note", "O", "E", "O-E", "(O-E)^2/E"
                    );
                    for c in &r.classes {
                        let _ = writeln!(
                            s,
                            "{:<8}{:>6}{:>12.6}{:>12.6}{:>12.6}",
                            c.label(),
                            c.observed,
                            c.expected,
                            c.deviation(),
                            c.contribution
                        );
                    }
                    let _ = writeln!(
                        s,
                        "chi-square {:.6}, df {}, critical {:.3} at alpha {} -> {}",
                        r.statistic,
                        r.df,
                        r.critical,
                        r.alpha,
                        if r.model_holds {
                            "model holds"
                        } else {
                            "model rejected"
                        }
                    );
                }
                (None, Some(e)) => {
                    let _ = writeln!(s, "test not possible: {e}");
                }
                (None, None) => {}
            }
        }

        s.push_str("\nVadi / Samvadi\n");
        match &self.selection {
            SelectionOutcome::Selected(sel) => {
                let _ = writeln!(s, "threshold {:.6}", sel.threshold);
                let _ = writeln!(
                    s,
                    "candidates {}",
                    sel.candidates
                        .iter()
                        .map(|l| format!("{l} (tau {:.3})", sel.stabilization[l]))
                        .collect::<Vec<_>>()
                        .join(", ")
                );
                for e in &sel.excluded {
                    let _ = writeln!(s, "excluded {} ({})", e.note, e.reason.name());
                }
                let _ = writeln!(
                    s,
                    "vadi {}, samvadi {}, interval {} semitones",
                    sel.vadi, sel.samvadi, sel.interval_semitones
                );
            }
            SelectionOutcome::Failed { error } => {
                let _ = writeln!(s, "not available: {error}");
            }
        }

        s.push_str("\nDurations\n");
        let _ = writeln!(
            s,
            "{:<6}{:>6}{:>12}{:>12}{:>6}",
            "note", "n", "mean", "sd", "rank"
        );
        for r in &self.durations.rows {
            let _ = writeln!(
                s,
                "{:<6}{:>6}{:>12.6}{:>12.6}{:>6}",
                r.note, r.count, r.mean, r.sd, r.rank
            );
        }
        let _ = writeln!(
            s,
            "nyas candidates: {}",
            self.durations
                .top_nyas
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(" ")
        );

        if !self.universal_ranks.is_empty() {
            s.push_str("\nUniversal ranks\n");
            let _ = writeln!(
                s,
                "{:<6}{:>12}{:>14}{:>12}",
                "note", "statistical", "psychological", "universal"
            );
            for u in &self.universal_ranks {
                let _ = writeln!(
                    s,
                    "{:<6}{:>12}{:>14}{:>12.6}",
                    u.note, u.statistical, u.psychological, u.universal
                );
            }
        }

        for p in &self.shoots {
            let _ = writeln!(s, "\nShoots in phase {}", p.phase);
            for sh in &p.shoots {
                let _ = writeln!(
                    s,
                    "{:<8}{:<7}{:>12.6}  (O {} vs E {:.3})",
                    sh.note,
                    match sh.direction {
                        Direction::Shoot => "shoot",
                        Direction::Drop => "drop",
                    },
                    sh.contribution,
                    sh.observed,
                    sh.expected
                );
            }
        }

        if let Some(t) = &self.transitions {
            let _ = writeln!(
                s,
                "\nTransitions: rising {} (convex {}, concave {}, linear {}), falling {} (convex {}, concave {}, linear {}), mixed {}, none {}",
                t.rising,
                t.rising_shape.convex,
                t.rising_shape.concave,
                t.rising_shape.linear,
                t.falling,
                t.falling_shape.convex,
                t.falling_shape.concave,
                t.falling_shape.linear,
                t.mixed,
                t.none
            );
        }
        if let Some(h) = &self.hats_valleys {
            let _ = writeln!(
                s,
                "Hats {} (skew +{} -{} ={}; height low {} moderate {} high {}), valleys {} (skew +{} -{} ={}; depth shallow {} moderate {} deep {})",
                h.hats,
                h.hat_skew.positive,
                h.hat_skew.negative,
                h.hat_skew.symmetric,
                h.hat_height.small,
                h.hat_height.moderate,
                h.hat_height.large,
                h.valleys,
                h.valley_skew.positive,
                h.valley_skew.negative,
                h.valley_skew.symmetric,
                h.valley_depth.small,
                h.valley_depth.moderate,
                h.valley_depth.large
            );
        }
        if let Some(i) = &self.ioi {
            let _ = writeln!(
                s,
                "Inter-onset intervals: {} pairs, min {:.6}, max {:.6}, mean {:.6}, {}",
                i.intervals,
                i.min,
                i.max,
                i.mean,
                if i.rhythmic {
                    "rhythmic"
                } else {
                    "not rhythmic"
                }
            );
        }
        s
    }

    /// Long-format CSV: `section,phase,note,metric,value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), ReportError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["section", "phase", "note", "metric", "value"])?;
        let mut row =
            |section: &str, phase: Option<usize>, note: &str, metric: &str, value: String| {
                w.write_record([
                    section,
                    &phase.map(|p| p.to_string()).unwrap_or_default(),
                    note,
                    metric,
                    &value,
                ])
            };
        let f = |x: f64| format!("{x:.6}");

        for (letter, count) in &self.tables.overall.counts {
            row(
                "frequency",
                None,
                &letter.to_string(),
                "count",
                count.to_string(),
            )?;
            if let Some(r) = self.tables.overall.relative(*letter) {
                row("frequency", None, &letter.to_string(), "relative", f(r))?;
            }
        }
        for (i, t) in self.tables.phases.iter().enumerate() {
            for (letter, count) in &t.counts {
                row(
                    "frequency",
                    Some(i + 1),
                    &letter.to_string(),
                    "count",
                    count.to_string(),
                )?;
                if let Some(r) = t.relative(*letter) {
                    row(
                        "frequency",
                        Some(i + 1),
                        &letter.to_string(),
                        "relative",
                        f(r),
                    )?;
                }
            }
        }
        for test in &self.chi_square {
            let p = Some(test.phase);
            for e in &test.expected {
                row(
                    "expected",
                    p,
                    &e.note.to_string(),
                    "expected",
                    f(e.expected),
                )?;
            }
            if let Some(r) = &test.result {
                for c in &r.classes {
                    row(
                        "chi-square",
                        p,
                        &c.label(),
                        "contribution",
                        f(c.contribution),
                    )?;
                }
                row("chi-square", p, "", "statistic", f(r.statistic))?;
                row("chi-square", p, "", "df", r.df.to_string())?;
                row("chi-square", p, "", "critical", f(r.critical))?;
            }
            row(
                "chi-square",
                p,
                "",
                "model_holds",
                test.model_holds.to_string(),
            )?;
        }
        if let SelectionOutcome::Selected(sel) = &self.selection {
            for (letter, tau) in &sel.stabilization {
                row(
                    "selection",
                    None,
                    &letter.to_string(),
                    "stabilization",
                    f(*tau),
                )?;
            }
            row(
                "selection",
                None,
                &sel.vadi.to_string(),
                "vadi",
                "true".into(),
            )?;
            row(
                "selection",
                None,
                &sel.samvadi.to_string(),
                "samvadi",
                "true".into(),
            )?;
        }
        for r in &self.durations.rows {
            row("duration", None, &r.note.to_string(), "mean", f(r.mean))?;
            row("duration", None, &r.note.to_string(), "sd", f(r.sd))?;
            row(
                "duration",
                None,
                &r.note.to_string(),
                "rank",
                r.rank.to_string(),
            )?;
        }
        for u in &self.universal_ranks {
            row(
                "universal",
                None,
                &u.note.to_string(),
                "rank",
                f(u.universal),
            )?;
        }
        for p in &self.shoots {
            for sh in &p.shoots {
                row(
                    "shoot",
                    Some(p.phase),
                    &sh.note,
                    "contribution",
                    f(sh.contribution),
                )?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::notation::NoteToken;

    fn events(letters: &[Letter]) -> Vec<NoteEvent> {
        letters
            .iter()
            .enumerate()
            .map(|(i, &l)| NoteEvent::new(NoteToken::middle(l), i as f64 * 0.5, 0.4))
            .collect()
    }

    fn sample() -> Vec<NoteEvent> {
        use Letter::*;
        let pattern = [S, G, N, G, S, R, G, N, M, G, N, S, G, D, N, G];
        events(&pattern.repeat(6))
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(
            analyze(&[], &AnalysisConfig::default()),
            Err(ReportError::NoEvents)
        ));
    }

    #[test]
    fn pipeline_on_stationary_sequence() {
        let report = analyze(&sample(), &AnalysisConfig::default()).unwrap();
        assert_eq!(report.summary.events, 96);
        assert_eq!(report.tables.phases.len(), 3);
        assert!(report.chi_square.iter().all(|t| t.model_holds));
        assert!(report.shoots.is_empty());
        let SelectionOutcome::Selected(sel) = &report.selection else {
            panic!("selection failed: {:?}", report.selection);
        };
        assert_ne!(sel.vadi, Letter::S);
        assert_eq!(sel.candidates[0], sel.vadi);
        assert!(!report.universal_ranks.is_empty());
        assert_eq!(report.ioi.as_ref().unwrap().intervals, 95);
        assert!(report.ioi.as_ref().unwrap().rhythmic);
    }

    #[test]
    fn failed_selection_is_reported_in_place() {
        // each third uses a different note, so no phase fits the overall mix
        use Letter::*;
        let mut letters = vec![S; 30];
        letters.extend([G; 30]);
        letters.extend([N; 30]);
        let mut cfg = AnalysisConfig::default();
        cfg.set("phase-mode", "disjoint-thirds").unwrap();
        let report = analyze(&events(&letters), &cfg).unwrap();
        assert!(report.chi_square.iter().all(|t| !t.model_holds));
        assert!(matches!(report.selection, SelectionOutcome::Failed { .. }));
        assert!(report.universal_ranks.is_empty());
        assert_eq!(report.shoots.len(), 3);
    }

    #[test]
    fn renderings() {
        let report = analyze(&sample(), &AnalysisConfig::default()).unwrap();
        let mut json = Vec::new();
        report.write_json(&mut json).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
        for key in [
            "config",
            "summary",
            "tables",
            "chi_square",
            "selection",
            "durations",
            "universal_ranks",
            "shoots",
            "transitions",
            "hats_valleys",
            "ioi",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let SelectionOutcome::Selected(sel) = &report.selection else {
            panic!("selection failed");
        };
        assert_eq!(v["selection"]["vadi"], sel.vadi.to_string());

        let mut text = Vec::new();
        report.write_text(&mut text).unwrap();
        let text = String::from_utf8(text).unwrap();
        assert!(text.contains(&format!("vadi {}", sel.vadi)));
        assert!(text.contains("Phase 3"));

        let mut csv_out = Vec::new();
        report.write_csv(&mut csv_out).unwrap();
        let mut rdr = csv::Reader::from_reader(csv_out.as_slice());
        let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
        assert!(rows.iter().all(|r| r.len() == 5));
        assert!(rows.iter().any(|r| &r[0] == "selection" && &r[3] == "vadi"));
    }
}
