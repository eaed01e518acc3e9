//! Analysis configuration, settable from a `key = value` file and from
//! command-line flags of the same (kebab-case) names.

use serde::Serialize;
use thiserror::Error;

use crate::analysis::{
    ExpectedSource, PhaseScheme, SdConvention, SelectionConfig, Weights, Window,
};
use crate::ingest::IngestConfig;
use crate::melody::{ShapeThresholds, DEFAULT_RHYTHM_TOLERANCE};
use crate::stats::GofOptions;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found {content:?}")]
    Syntax { line: usize, content: String },
    #[error("unknown configuration key {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseMode {
    #[default]
    OverlappingHalves,
    DisjointThirds,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisConfig {
    pub tonic_hz: f64,
    pub cents_tolerance: f64,
    pub min_duration: f64,
    pub phase_mode: PhaseMode,
    pub windows: Vec<Window>,
    pub alpha: f64,
    pub pool_threshold: f64,
    pub ddof: u32,
    pub expected_source: ExpectedSource,
    /// `None` selects `1/k`.
    pub freq_threshold: Option<f64>,
    pub epsilon: f64,
    pub consonance_preference: bool,
    pub weights: Weights,
    pub format: OutputFormat,
    pub sd_convention: SdConvention,
    pub top_nyas: usize,
    pub shoots: usize,
    pub rhythm_tolerance: f64,
    pub shape_thresholds: ShapeThresholds,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let ingest = IngestConfig::default();
        let gof = GofOptions::default();
        let selection = SelectionConfig::default();
        Self {
            tonic_hz: ingest.tonic_hz,
            cents_tolerance: ingest.cents_tolerance,
            min_duration: ingest.min_duration,
            phase_mode: PhaseMode::default(),
            windows: Vec::new(),
            alpha: gof.alpha,
            pool_threshold: gof.pool_threshold,
            ddof: gof.ddof,
            expected_source: ExpectedSource::default(),
            freq_threshold: selection.freq_threshold,
            epsilon: selection.epsilon,
            consonance_preference: selection.consonance_preference,
            weights: Weights::default(),
            format: OutputFormat::default(),
            sd_convention: SdConvention::default(),
            top_nyas: 4,
            shoots: 3,
            rhythm_tolerance: DEFAULT_RHYTHM_TOLERANCE,
            shape_thresholds: ShapeThresholds::default(),
        }
    }
}

pub const KEYS: &[&str] = &[
    "tonic-hz",
    "cents-tolerance",
    "min-duration",
    "phase-mode",
    "windows",
    "alpha",
    "pool-threshold",
    "ddof",
    "expected-source",
    "freq-threshold",
    "epsilon",
    "consonance-preference",
    "weights",
    "format",
    "sd-convention",
    "top-nyas",
    "shoots",
    "rhythm-tolerance",
];

fn invalid(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.into(),
    }
}

fn number(key: &str, value: &str) -> Result<f64, ConfigError> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| invalid(key, value, "not a finite number"))
}

fn positive(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v = number(key, value)?;
    if v <= 0.0 {
        return Err(invalid(key, value, "must be positive"));
    }
    Ok(v)
}

fn parse_windows(key: &str, value: &str) -> Result<Vec<Window>, ConfigError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|w| {
            let (a, b) = w
                .split_once(':')
                .ok_or_else(|| invalid(key, value, format!("window {w:?} is not start:end")))?;
            let (a, b) = (number(key, a.trim())?, number(key, b.trim())?);
            Window::new(a, b).map_err(|e| invalid(key, value, e.to_string()))
        })
        .collect()
}

impl AnalysisConfig {
    /// Sets one option by its kebab-case name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "tonic-hz" => self.tonic_hz = positive(key, value)?,
            "cents-tolerance" => {
                let v = positive(key, value)?;
                if v > 100.0 {
                    return Err(invalid(key, value, "must not exceed 100 cents"));
                }
                self.cents_tolerance = v;
            }
            "min-duration" => {
                let v = number(key, value)?;
                if v < 0.0 {
                    return Err(invalid(key, value, "must be non-negative"));
                }
                self.min_duration = v;
            }
            "phase-mode" => {
                self.phase_mode = match value {
                    "overlapping-halves" => PhaseMode::OverlappingHalves,
                    "disjoint-thirds" => PhaseMode::DisjointThirds,
                    "explicit" => PhaseMode::Explicit,
                    _ => {
                        return Err(invalid(
                            key,
                            value,
                            "expected overlapping-halves, disjoint-thirds or explicit",
                        ))
                    }
                }
            }
            "windows" => {
                self.windows = parse_windows(key, value)?;
                self.phase_mode = PhaseMode::Explicit;
            }
            "alpha" => {
                let v = number(key, value)?;
                if !(v > 0.0 && v < 1.0) {
                    return Err(invalid(key, value, "must lie in (0, 1)"));
                }
                self.alpha = v;
            }
            "pool-threshold" => {
                let v = number(key, value)?;
                if v < 0.0 {
                    return Err(invalid(key, value, "must be non-negative"));
                }
                self.pool_threshold = v;
            }
            "ddof" => {
                self.ddof = value
                    .parse()
                    .map_err(|_| invalid(key, value, "not a non-negative integer"))?
            }
            "expected-source" => {
                self.expected_source = match value {
                    "overall" => ExpectedSource::Overall,
                    "phase" => ExpectedSource::Phase,
                    _ => return Err(invalid(key, value, "expected overall or phase")),
                }
            }
            "freq-threshold" => {
                self.freq_threshold = if value == "auto" {
                    None
                } else {
                    let v = number(key, value)?;
                    if !(0.0..=1.0).contains(&v) {
                        return Err(invalid(key, value, "must lie in [0, 1] or be `auto`"));
                    }
                    Some(v)
                }
            }
            "epsilon" => self.epsilon = positive(key, value)?,
            "consonance-preference" => {
                self.consonance_preference = value
                    .parse()
                    .map_err(|_| invalid(key, value, "expected true or false"))?
            }
            "weights" => {
                let (a, b) = value
                    .split_once(',')
                    .ok_or_else(|| invalid(key, value, "expected w1,w2"))?;
                self.weights = Weights {
                    statistical: positive(key, a.trim())?,
                    psychological: positive(key, b.trim())?,
                };
            }
            "format" => {
                self.format = match value {
                    "text" => OutputFormat::Text,
                    "json" => OutputFormat::Json,
                    "csv" => OutputFormat::Csv,
                    _ => return Err(invalid(key, value, "expected text, json or csv")),
                }
            }
            "sd-convention" => {
                self.sd_convention = match value {
                    "population" => SdConvention::Population,
                    "sample" => SdConvention::Sample,
                    _ => return Err(invalid(key, value, "expected population or sample")),
                }
            }
            "top-nyas" => {
                self.top_nyas = value
                    .parse()
                    .map_err(|_| invalid(key, value, "not a non-negative integer"))?
            }
            "shoots" => {
                self.shoots = value
                    .parse()
                    .map_err(|_| invalid(key, value, "not a non-negative integer"))?
            }
            "rhythm-tolerance" => {
                let v = number(key, value)?;
                if v < 0.0 {
                    return Err(invalid(key, value, "must be non-negative"));
                }
                self.rhythm_tolerance = v;
            }
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies every `key = value` line of a config file. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn apply_file(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                content: raw.to_string(),
            })?;
            let value = value.trim().trim_matches('"');
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn from_file_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.apply_file(text)?;
        Ok(cfg)
    }

    /// Checks cross-field constraints.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.phase_mode == PhaseMode::Explicit && self.windows.is_empty() {
            return Err(invalid(
                "windows",
                "",
                "explicit phase mode needs at least one window",
            ));
        }
        Ok(())
    }

    pub fn ingest(&self) -> IngestConfig {
        IngestConfig {
            tonic_hz: self.tonic_hz,
            cents_tolerance: self.cents_tolerance,
            min_duration: self.min_duration,
        }
    }

    pub fn phase_scheme(&self) -> PhaseScheme {
        match self.phase_mode {
            PhaseMode::OverlappingHalves => PhaseScheme::OverlappingHalves,
            PhaseMode::DisjointThirds => PhaseScheme::DisjointThirds,
            PhaseMode::Explicit => PhaseScheme::Explicit(self.windows.clone()),
        }
    }

    pub fn gof(&self) -> GofOptions {
        GofOptions {
            pool_threshold: self.pool_threshold,
            alpha: self.alpha,
            ddof: self.ddof,
        }
    }

    pub fn selection(&self) -> SelectionConfig {
        SelectionConfig {
            freq_threshold: self.freq_threshold,
            epsilon: self.epsilon,
            consonance_preference: self.consonance_preference,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = AnalysisConfig::default();
        assert_eq!(c.tonic_hz, 261.63);
        assert_eq!(c.cents_tolerance, 50.0);
        assert_eq!(c.min_duration, 0.02);
        assert_eq!(c.alpha, 0.05);
        assert_eq!(c.pool_threshold, 5.0);
        assert_eq!(c.freq_threshold, None);
        assert_eq!(c.epsilon, 0.02);
        assert_eq!((c.weights.statistical, c.weights.psychological), (2.0, 1.0));
        assert_eq!(c.phase_scheme(), PhaseScheme::OverlappingHalves);
        assert_eq!(c.sd_convention, SdConvention::Population);
    }

    #[test]
    fn file_parsing() {
        let c = AnalysisConfig::from_file_text(
            "# comment\nalpha = 0.01\nwindows = 0:10, 5:15\nweights = 1, 3\nformat = \"json\"\n\nfreq-threshold = auto\n",
        )
        .unwrap();
        assert_eq!(c.alpha, 0.01);
        assert_eq!(c.phase_mode, PhaseMode::Explicit);
        assert_eq!(c.windows.len(), 2);
        assert_eq!(c.windows[1].end, 15.0);
        assert_eq!(c.weights.psychological, 3.0);
        assert_eq!(c.format, OutputFormat::Json);
        c.validate().unwrap();
    }

    #[test]
    fn every_key_is_settable() {
        let sample = [
            ("tonic-hz", "440"),
            ("cents-tolerance", "30"),
            ("min-duration", "0.05"),
            ("phase-mode", "disjoint-thirds"),
            ("windows", "0:1"),
            ("alpha", "0.1"),
            ("pool-threshold", "3"),
            ("ddof", "1"),
            ("expected-source", "phase"),
            ("freq-threshold", "0.2"),
            ("epsilon", "0.05"),
            ("consonance-preference", "false"),
            ("weights", "1,2"),
            ("format", "csv"),
            ("sd-convention", "sample"),
            ("top-nyas", "3"),
            ("shoots", "2"),
            ("rhythm-tolerance", "0.02"),
        ];
        assert_eq!(sample.len(), KEYS.len());
        let mut c = AnalysisConfig::default();
        for (k, v) in sample {
            assert!(KEYS.contains(&k));
            c.set(k, v).unwrap();
        }
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = AnalysisConfig::default();
        assert!(matches!(
            c.set("alpha", "1.5"),
            Err(ConfigError::InvalidValue { .. })
        ));
        assert!(c.set("weights", "0,1").is_err());
        assert!(c.set("weights", "2").is_err());
        assert!(c.set("windows", "5:1").is_err());
        assert!(c.set("cents-tolerance", "150").is_err());
        assert!(c.set("tonic-hz", "-1").is_err());
        assert!(matches!(
            c.set("colour", "red"),
            Err(ConfigError::UnknownKey(_))
        ));
        assert!(matches!(
            AnalysisConfig::from_file_text("alpha 0.1"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        let mut c = AnalysisConfig::default();
        c.set("phase-mode", "explicit").unwrap();
        assert!(c.validate().is_err());
    }
}
