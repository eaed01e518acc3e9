use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ragastat::config::{AnalysisConfig, ConfigError, OutputFormat};
use ragastat::ingest::{
    parse_pitch_track, quantize, read_events_csv, write_events_csv, IngestError, NoteEvent,
};
use ragastat::melody::{ioi_series, render_ioi_svg, write_ioi_csv};
use ragastat::report::{analyze, ReportError};

const EXIT_IO: u8 = 1;
const EXIT_MALFORMED: u8 = 2;
const EXIT_INSUFFICIENT: u8 = 3;
const EXIT_CONFIG: u8 = 4;

#[derive(Parser)]
#[command(
    name = "ragastat",
    version,
    about = "Statistical analysis of note distributions in raga performances"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quantize a `time,frequency` pitch track into note events.
    Ingest {
        /// Pitch-track file (CSV or whitespace separated).
        input: PathBuf,
        /// Output CSV; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        options: Options,
    },
    /// Analyze a note-event CSV.
    Analyze {
        input: PathBuf,
        /// Write the report here instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        options: Options,
    },
    /// Inter-onset-interval series of a note-event CSV.
    Plot {
        input: PathBuf,
        /// CSV of the series; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also render the series as an SVG line chart.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        options: Options,
    },
}

/// Configuration file plus per-key overrides. Values are validated by the
/// configuration layer so that every bad value maps to the same exit code.
#[derive(Args)]
struct Options {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override any configuration key, e.g. `--set alpha=0.01`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    tonic_hz: Option<String>,
    #[arg(long)]
    cents_tolerance: Option<String>,
    #[arg(long)]
    min_duration: Option<String>,
    #[arg(long)]
    phase_mode: Option<String>,
    /// Comma-separated `start:end` windows in seconds.
    #[arg(long)]
    windows: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    pool_threshold: Option<String>,
    #[arg(long)]
    ddof: Option<String>,
    #[arg(long)]
    expected_source: Option<String>,
    #[arg(long)]
    freq_threshold: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    weights: Option<String>,
    /// text, json or csv.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    sd_convention: Option<String>,
    #[arg(long)]
    top_nyas: Option<String>,
    #[arg(long)]
    shoots: Option<String>,
    #[arg(long)]
    rhythm_tolerance: Option<String>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl std::fmt::Display) -> Self {
        Self {
            code,
            message: message.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::new(EXIT_IO, e)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::new(EXIT_CONFIG, e)
    }
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        let code = match &e {
            IngestError::EmptyInput => EXIT_INSUFFICIENT,
            IngestError::InvalidConfig(_) => EXIT_CONFIG,
            IngestError::Io(_) => EXIT_IO,
            IngestError::Csv(c) if c.is_io_error() => EXIT_IO,
            _ => EXIT_MALFORMED,
        };
        Failure::new(code, e)
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        let code = match &e {
            ReportError::NoEvents | ReportError::Analysis(_) => EXIT_INSUFFICIENT,
            _ => EXIT_IO,
        };
        Failure::new(code, e)
    }
}

impl Options {
    fn resolve(&self) -> Result<AnalysisConfig, Failure> {
        let mut cfg = AnalysisConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::new(EXIT_CONFIG, format!("{}: {e}", path.display())))?;
            cfg.apply_file(&text)?;
        }
        let named = [
            ("tonic-hz", &self.tonic_hz),
            ("cents-tolerance", &self.cents_tolerance),
            ("min-duration", &self.min_duration),
            ("phase-mode", &self.phase_mode),
            ("windows", &self.windows),
            ("alpha", &self.alpha),
            ("pool-threshold", &self.pool_threshold),
            ("ddof", &self.ddof),
            ("expected-source", &self.expected_source),
            ("freq-threshold", &self.freq_threshold),
            ("epsilon", &self.epsilon),
            ("weights", &self.weights),
            ("format", &self.format),
            ("sd-convention", &self.sd_convention),
            ("top-nyas", &self.top_nyas),
            ("shoots", &self.shoots),
            ("rhythm-tolerance", &self.rhythm_tolerance),
        ];
        for (key, value) in named {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| {
                Failure::new(EXIT_CONFIG, format!("--set expects KEY=VALUE, got {kv:?}"))
            })?;
            cfg.set(k.trim(), v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => {
            Box::new(BufWriter::new(File::create(p).map_err(|e| {
                Failure::new(EXIT_IO, format!("{}: {e}", p.display()))
            })?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_events(path: &Path) -> Result<Vec<NoteEvent>, Failure> {
    let file =
        File::open(path).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
    Ok(read_events_csv(file)?)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Ingest {
            input,
            output,
            options,
        } => {
            let cfg = options.resolve()?;
            let file = File::open(&input)
                .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", input.display())))?;
            let samples = parse_pitch_track(file)?;
            let events = quantize(&samples, &cfg.ingest())?;
            if events.is_empty() {
                return Err(Failure::new(
                    EXIT_INSUFFICIENT,
                    "no note lasts the minimum duration",
                ));
            }
            let mut out = open_output(output.as_deref())?;
            write_events_csv(&mut out, &events)?;
            out.flush()?;
            let (first, last) = (events[0].onset, events[events.len() - 1].end());
            let summary = format!(
                "{} samples -> {} note events spanning {first:.3}-{last:.3} s",
                samples.len(),
                events.len()
            );
            // keep standard output clean when it carries the CSV itself
            if output.is_some() {
                println!("{summary}");
            } else {
                eprintln!("{summary}");
            }
        }
        Command::Analyze {
            input,
            output,
            options,
        } => {
            let cfg = options.resolve()?;
            let events = read_events(&input)?;
            let report = analyze(&events, &cfg)?;
            let mut out = open_output(output.as_deref())?;
            report.write(cfg.format, &mut out)?;
            out.flush()?;
        }
        Command::Plot {
            input,
            output,
            svg,
            options,
        } => {
            let cfg = options.resolve()?;
            if cfg.format != OutputFormat::Text && cfg.format != OutputFormat::Csv {
                return Err(Failure::new(EXIT_CONFIG, "plot writes CSV only"));
            }
            let events = read_events(&input)?;
            let series = ioi_series(&events, cfg.rhythm_tolerance)
                .map_err(|e| Failure::new(EXIT_INSUFFICIENT, e))?;
            let mut out = open_output(output.as_deref())?;
            write_ioi_csv(&mut out, &series).map_err(|e| Failure::new(EXIT_IO, e))?;
            out.flush()?;
            if let Some(path) = svg {
                let title = input
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                fs::write(&path, render_ioi_svg(&series, &title))
                    .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("ragastat: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
