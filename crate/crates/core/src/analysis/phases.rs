use serde::{Deserialize, Serialize};

use super::frequency::{expected_counts, frequency_table, FrequencyTable};
use super::{AnalysisError, Window};
use crate::ingest::NoteEvent;
use crate::stats::{chi_square_gof, ChiSquareResult, GofOptions, StatsError};

/// How a recording of length `T` is cut into phases.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode", content = "windows")]
pub enum PhaseScheme {
    /// `[0, T/2)`, `[T/4, 3T/4)`, `[T/2, T)`.
    #[default]
    OverlappingHalves,
    /// Three equal, disjoint thirds.
    DisjointThirds,
    /// User-supplied windows, clipped to the recording.
    Explicit(Vec<Window>),
}

impl PhaseScheme {
    pub fn name(&self) -> &'static str {
        match self {
            PhaseScheme::OverlappingHalves => "overlapping-halves",
            PhaseScheme::DisjointThirds => "disjoint-thirds",
            PhaseScheme::Explicit(_) => "explicit",
        }
    }

    pub fn windows(&self, length: f64) -> Result<Vec<Window>, AnalysisError> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(AnalysisError::InvalidWindow {
                start: 0.0,
                end: length,
            });
        }
        match self {
            PhaseScheme::OverlappingHalves => [(0.0, 0.5), (0.25, 0.75), (0.5, 1.0)]
                .iter()
                .map(|&(a, b)| Window::new(a * length, b * length))
                .collect(),
            PhaseScheme::DisjointThirds => (0..3)
                .map(|i| Window::new(length * i as f64 / 3.0, length * (i + 1) as f64 / 3.0))
                .collect(),
            PhaseScheme::Explicit(ws) => ws
                .iter()
                .map(|w| Window::new(w.start, w.end.min(length)))
                .collect(),
        }
    }
}

/// End of the last event; zero for an empty list.
pub fn recording_length(events: &[NoteEvent]) -> f64 {
    events.iter().map(NoteEvent::end).fold(0.0, f64::max)
}

/// Where expected proportions come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpectedSource {
    /// The full-recording table.
    #[default]
    Overall,
    /// Each phase's own table (reproduces the observed counts exactly).
    Phase,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ModelCheckOptions {
    pub gof: GofOptions,
    pub expected_source: ExpectedSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCheck {
    pub window: Window,
    pub table: FrequencyTable,
    pub expected: Vec<f64>,
    pub test: Result<ChiSquareResult, StatsError>,
}

impl PhaseCheck {
    pub fn model_holds(&self) -> bool {
        self.test.as_ref().is_ok_and(|r| r.model_holds)
    }
}

/// Chi-square test of each phase's counts against the reference proportions.
pub fn phase_model_check(
    events: &[NoteEvent],
    scheme: &PhaseScheme,
    reference: &FrequencyTable,
    opts: &ModelCheckOptions,
) -> Result<Vec<PhaseCheck>, AnalysisError> {
    if reference.is_empty() {
        return Err(AnalysisError::EmptyReference);
    }
    let windows = scheme.windows(recording_length(events))?;
    windows
        .into_iter()
        .map(|window| {
            let table = frequency_table(events, window);
            let basis = match opts.expected_source {
                ExpectedSource::Overall => reference,
                ExpectedSource::Phase => &table,
            };
            if let Some(&stray) = table.counts.keys().find(|l| basis.count(**l) == 0) {
                return Err(AnalysisError::LetterNotInReference(stray));
            }
            let letters = basis.letters();
            let observed: Vec<u64> = letters.iter().map(|&l| table.count(l)).collect();
            let labels: Vec<String> = letters.iter().map(ToString::to_string).collect();
            let expected = if basis.is_empty() {
                Vec::new()
            } else {
                expected_counts(basis, table.total)?
            };
            let test = chi_square_gof(&observed, &expected, &labels, &opts.gof);
            Ok(PhaseCheck {
                window,
                table,
                expected,
                test,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::notation::{Letter, NoteToken};

    fn events_from(letters: &[Letter]) -> Vec<NoteEvent> {
        letters
            .iter()
            .enumerate()
            .map(|(i, &l)| NoteEvent::new(NoteToken::middle(l), i as f64, 0.5))
            .collect()
    }

    #[test]
    fn scheme_windows() {
        let w = PhaseScheme::OverlappingHalves.windows(120.0).unwrap();
        assert_eq!(
            w.iter().map(|w| (w.start, w.end)).collect::<Vec<_>>(),
            vec![(0.0, 60.0), (30.0, 90.0), (60.0, 120.0)]
        );
        let w = PhaseScheme::DisjointThirds.windows(120.0).unwrap();
        assert_eq!(
            w.iter().map(|w| (w.start, w.end)).collect::<Vec<_>>(),
            vec![(0.0, 40.0), (40.0, 80.0), (80.0, 120.0)]
        );
        let explicit = PhaseScheme::Explicit(vec![Window::new(10.0, 200.0).unwrap()]);
        assert_eq!(explicit.windows(120.0).unwrap()[0].end, 120.0);
        assert!(PhaseScheme::Explicit(vec![Window {
            start: 130.0,
            end: 200.0
        }])
        .windows(120.0)
        .is_err());
        assert!(PhaseScheme::OverlappingHalves.windows(0.0).is_err());
    }

    #[test]
    fn self_reference_gives_zero_statistic() {
        use Letter::*;
        let events = events_from(&[S, G, N, S, G, N, S, G, N, S, S, G, N, N, S, G, G, N, S, N]);
        let reference = frequency_table(&events, Window::new(0.0, 100.0).unwrap());
        let opts = ModelCheckOptions {
            expected_source: ExpectedSource::Phase,
            gof: GofOptions {
                pool_threshold: 0.0,
                ..GofOptions::default()
            },
        };
        let checks =
            phase_model_check(&events, &PhaseScheme::DisjointThirds, &reference, &opts).unwrap();
        for c in &checks {
            let r = c.test.as_ref().unwrap();
            assert!(r.statistic.abs() < 1e-12);
            assert!(c.model_holds());
        }
    }

    #[test]
    fn skewed_phase_fails_uniform_reference() {
        // uniform reference over three notes, phase made of one note only:
        // O = (30, 0, 0), E = (10, 10, 10) -> 40 + 10 + 10 = 60
        use Letter::*;
        let reference = FrequencyTable::from_counts(
            Window::new(0.0, 1.0).unwrap(),
            [(S, 10), (G, 10), (N, 10)],
        );
        let events = events_from(&[S; 30]);
        let checks = phase_model_check(
            &events,
            &PhaseScheme::Explicit(vec![Window::new(0.0, 100.0).unwrap()]),
            &reference,
            &ModelCheckOptions::default(),
        )
        .unwrap();
        let r = checks[0].test.as_ref().unwrap();
        assert!((r.statistic - 60.0).abs() < 1e-9);
        assert_eq!(r.df, 2);
        assert!(!r.model_holds);
    }

    #[test]
    fn expected_sums_to_phase_total() {
        use Letter::*;
        let events = events_from(&[S, S, G, R, N, S, G, G, N, D, S, R, N, N, G]);
        let reference = frequency_table(&events, Window::new(0.0, 100.0).unwrap());
        let checks = phase_model_check(
            &events,
            &PhaseScheme::OverlappingHalves,
            &reference,
            &ModelCheckOptions::default(),
        )
        .unwrap();
        for c in checks {
            let s: f64 = c.expected.iter().sum();
            assert!((s - c.table.total as f64).abs() < 1e-6);
        }
    }

    #[test]
    fn stray_letter_is_rejected() {
        use Letter::*;
        let reference =
            FrequencyTable::from_counts(Window::new(0.0, 1.0).unwrap(), [(S, 1), (G, 1)]);
        let err = phase_model_check(
            &events_from(&[S, G, N]),
            &PhaseScheme::DisjointThirds,
            &reference,
            &ModelCheckOptions::default(),
        )
        .unwrap_err();
        assert_eq!(err, AnalysisError::LetterNotInReference(N));
    }

    #[test]
    fn empty_phase_reports_failure_in_place() {
        use Letter::*;
        let events = events_from(&[S, G, S, G]);
        let reference = frequency_table(&events, Window::new(0.0, 100.0).unwrap());
        let scheme = PhaseScheme::Explicit(vec![
            Window::new(0.0, 2.0).unwrap(),
            Window::new(10.0, 20.0).unwrap(),
        ]);
        // the second window lies beyond the recording
        assert!(phase_model_check(&events, &scheme, &reference, &Default::default()).is_err());
        let scheme = PhaseScheme::Explicit(vec![
            Window::new(0.0, 4.0).unwrap(),
            Window::new(0.2, 0.4).unwrap(),
        ]);
        let checks = phase_model_check(&events, &scheme, &reference, &Default::default()).unwrap();
        assert!(checks[1].table.is_empty());
        assert!(checks[1].test.is_err());
        assert!(!checks[1].model_holds());
    }
}
