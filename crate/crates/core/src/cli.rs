//! Command-line front end. Every command reads a JSON [`RunConfig`],
//! writes a pretty-printed JSON report and optionally a CSV series.
//!
//! Exit codes: 0 success, 1 a mathematical check failed, 2 numerical
//! non-convergence, 3 configuration or input error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::breaker::{self, run_breaker, BreakerReport, BreakerRun, HypothesisReport};
use crate::certifier::{
    certify, condition_csv_rows, root_csv_rows, CONDITION_CSV_HEADER, ROOT_CSV_HEADER,
};
use crate::config::RunConfig;
use crate::defect::{breaker_defect, partition_defect, MixedDefect};
use crate::error::{Error, Result};
use crate::genfun::GenFn;
use crate::pw::DefectReport;
use crate::spectra::{validate_family, SpectrumWindow, ValidationReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_NO_CONVERGENCE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "expsynth",
    version,
    about = "Exponential systems with lacunary spectra"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct IoArgs {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// JSON report; printed to stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Overrides `truncation.window`.
    #[arg(long, value_name = "N")]
    pub window: Option<i64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structural checks on the family and the zeros of the model.
    Validate(IoArgs),
    /// Run the synthesis-breaking construction.
    Break(IoArgs),
    /// Check the hereditary-completeness conditions.
    Certify(IoArgs),
    /// Sampled Gram defect of a mixed system.
    Defect {
        #[command(flatten)]
        io: IoArgs,
        /// `breaker`, or `explicit:x1,x2,...` for biorthogonal points.
        #[arg(long, value_name = "SPEC", default_value = "breaker")]
        partition: String,
    },
    /// Tables of G for plotting.
    Example {
        /// `simple_example` or `kadets`; otherwise the model of `--config`.
        name: Option<String>,
        #[command(flatten)]
        io: IoArgs,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Io(_) => EXIT_CONFIG,
        Error::Convergence { .. } | Error::NonContraction { .. } => EXIT_NO_CONVERGENCE,
        _ => EXIT_CHECK_FAILED,
    }
}

/// What a command produced. `extra` is a second CSV series, written
/// next to the main one with its tag inserted before the extension.
pub struct Output {
    pub code: i32,
    pub json: String,
    pub csv: String,
    pub extra: Option<(&'static str, String)>,
}

fn csv_text(header: &str, rows: Vec<String>) -> String {
    let mut csv = String::from(header);
    csv.push('\n');
    for r in rows {
        csv.push_str(&r);
        csv.push('\n');
    }
    csv
}

impl Output {
    fn new<T: Serialize>(
        passed: bool,
        report: &T,
        header: &str,
        rows: Vec<String>,
    ) -> Result<Self> {
        Ok(Self {
            code: if passed { EXIT_OK } else { EXIT_CHECK_FAILED },
            json: to_json(report)?,
            csv: csv_text(header, rows),
            extra: None,
        })
    }
}

pub fn to_json<T: Serialize>(report: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Io(format!("serializing report: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Writes through a temporary file in the same directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| Error::Io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

fn load(io: &IoArgs) -> Result<RunConfig> {
    let path = io
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config is required".into()))?;
    let cfg = RunConfig::load(path)?;
    match io.window {
        Some(w) => cfg.with_window(w),
        None => Ok(cfg),
    }
}

#[derive(Debug, Serialize)]
struct ValidateReport<'a> {
    model: &'static str,
    family: &'a ValidationReport,
    zeros: &'a SpectrumWindow,
    passed: bool,
}

/// Zeros are enumerated on this neighbourhood of the origin.
const VALIDATE_RADIUS: f64 = 256.0;

pub fn cmd_validate(cfg: &RunConfig) -> Result<Output> {
    let model = cfg.model()?;
    let family = cfg.family(&model)?;
    let r = VALIDATE_RADIUS.min(cfg.truncation.window as f64);
    let zeros = model.zeros(-r, r, cfg.breaker.zero_step)?;
    let window = SpectrumWindow::observe(&zeros.xs(), -r, r);
    let report = validate_family(&family, Some((&window, cfg.breaker.cell)));
    let passed = report.passed();
    let rows = report
        .checks
        .iter()
        .map(|c| format!("{},{}", c.name, c.passed))
        .collect();
    Output::new(
        passed,
        &ValidateReport {
            model: model.name(),
            family: &report,
            zeros: &window,
            passed,
        },
        "check,passed",
        rows,
    )
}

#[derive(Debug, Serialize)]
struct BreakReport<'a> {
    model: &'static str,
    hypotheses: &'a HypothesisReport,
    breaker: &'a BreakerReport,
    passed: bool,
}

fn breaker_targets_met(run: &BreakerRun) -> bool {
    let r = &run.report;
    run.hypotheses.passed()
        && r.max_s_residual <= r.s_target
        && r.pairing > 0.0
        && r.orth_within_budget
        && r.spot_within_budget
}

pub fn cmd_break(cfg: &RunConfig) -> Result<Output> {
    let model = cfg.model()?;
    let family = cfg.family(&model)?;
    let run = run_breaker(&model, &cfg.breaker_config(family))?;
    let passed = breaker_targets_met(&run);
    Output::new(
        passed,
        &BreakReport {
            model: model.name(),
            hypotheses: &run.hypotheses,
            breaker: &run.report,
            passed,
        },
        breaker::CSV_HEADER,
        breaker::csv_rows(&run.report),
    )
}

pub fn cmd_certify(cfg: &RunConfig) -> Result<Output> {
    let model = cfg.model()?;
    let family = cfg.family(&model)?;
    let weights = cfg.weights(&model, &family)?;
    let run = certify(&weights, &family, &cfg.certifier, cfg.rule_divergent()?)?;
    let mut out = Output::new(
        run.report.passed,
        &run.report,
        CONDITION_CSV_HEADER,
        condition_csv_rows(&run.report),
    )?;
    out.extra = Some(("roots", csv_text(ROOT_CSV_HEADER, root_csv_rows(&run))));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Partition {
    Breaker,
    Explicit(Vec<f64>),
}

impl std::str::FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "breaker" {
            return Ok(Self::Breaker);
        }
        let list = s.strip_prefix("explicit:").ok_or_else(|| {
            Error::Config(format!(
                "--partition {s:?}: expected `breaker` or `explicit:x1,x2,...`"
            ))
        })?;
        let xs = list
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::Config(format!("--partition: bad point {t:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self::Explicit(xs))
    }
}

#[derive(Debug, Serialize)]
#[serde(tag = "partition", rename_all = "snake_case")]
enum DefectSweep {
    Breaker {
        t: Vec<f64>,
        entries: Vec<MixedDefect>,
        passed: bool,
    },
    Explicit {
        points: Vec<f64>,
        entries: Vec<DefectReport>,
    },
}

fn sigma_rows(window: i64, r: &DefectReport) -> Vec<String> {
    r.singular_values
        .iter()
        .enumerate()
        .map(|(i, s)| format!("{window},{i},{s:.16e}"))
        .collect()
}

pub fn cmd_defect(cfg: &RunConfig, partition: &Partition) -> Result<Output> {
    let model = cfg.model()?;
    let family = cfg.family(&model)?;
    let n = cfg.truncation.window;
    if let Some(&w) = cfg.defect.windows.iter().find(|&&w| w > n) {
        return Err(Error::Config(format!(
            "defect window {w} exceeds truncation.window = {n}"
        )));
    }
    let radius = cfg.defect.radius;
    let mut rows = Vec::new();
    let (report, passed) = match partition {
        Partition::Breaker => {
            let run = run_breaker(&model, &cfg.breaker_config(family))?;
            let mut entries = Vec::new();
            for &w in &cfg.defect.windows {
                let e = breaker_defect(&model, &run, w, radius)?;
                rows.extend(sigma_rows(w, &e.mixed));
                entries.push(e);
            }
            let passed = entries
                .iter()
                .all(|e| e.lower_bound > 0.0 && e.residual >= e.lower_bound);
            let t = run.t.clone();
            (DefectSweep::Breaker { t, entries, passed }, passed)
        }
        Partition::Explicit(points) => {
            let centers: Vec<f64> = family.entries().iter().map(|e| e.rho).collect();
            let mut entries = Vec::new();
            for &w in &cfg.defect.windows {
                let e = partition_defect(&model, &centers, points, w, radius)?;
                rows.extend(sigma_rows(w, &e));
                entries.push(e);
            }
            (
                DefectSweep::Explicit {
                    points: points.clone(),
                    entries,
                },
                true,
            )
        }
    };
    Output::new(passed, &report, "window,index,sigma", rows)
}

#[derive(Debug, Serialize)]
struct ExampleReport {
    model: &'static str,
    x_min: f64,
    x_max: f64,
    step: f64,
    integer_samples: Vec<(i64, f64)>,
    zeros: Vec<f64>,
}

/// Built-in configurations for `example NAME`.
pub fn builtin(name: &str) -> Result<RunConfig> {
    let text = match name {
        "simple_example" | "simple" => r#"{"model": {"kind": "simple_example"}}"#,
        "kadets" => {
            r#"{"model": {"kind": "kadets", "delta0": 0.5, "delta": 0.75,
                "rho": {"kind": "powers_of_two", "k_max": 40}}}"#
        }
        _ => {
            return Err(Error::Config(format!(
                "unknown example {name:?} (simple_example, kadets)"
            )))
        }
    };
    RunConfig::from_json(text)
}

pub fn cmd_example(cfg: &RunConfig) -> Result<Output> {
    let model = cfg.model()?;
    let e = cfg.example;
    let count = ((e.x_max - e.x_min) / e.step + 1e-9).floor() as i64;
    let rows = (0..=count)
        .map(|i| {
            let x = e.x_min + i as f64 * e.step;
            format!("{x:.16e},{:.16e}", model.eval(x))
        })
        .collect();
    let integer_samples = ((e.x_min.ceil() as i64)..=(e.x_max.floor() as i64))
        .map(|n| (n, model.eval(n as f64)))
        .collect();
    let zeros = model.zeros(e.x_min, e.x_max, cfg.breaker.zero_step)?.xs();
    let report = ExampleReport {
        model: model.name(),
        x_min: e.x_min,
        x_max: e.x_max,
        step: e.step,
        integer_samples,
        zeros,
    };
    Output::new(true, &report, "x,G", rows)
}

fn tagged_path(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{tag}"),
    };
    path.with_file_name(name)
}

fn emit(out: &Output, io: &IoArgs, cfg: &RunConfig) -> Result<()> {
    match io.out.as_ref().or(cfg.output.json.as_ref()) {
        Some(p) => write_atomic(p, &out.json)?,
        None => print!("{}", out.json),
    }
    if let Some(p) = io.csv.as_ref().or(cfg.output.csv.as_ref()) {
        write_atomic(p, &out.csv)?;
        if let Some((tag, text)) = &out.extra {
            write_atomic(&tagged_path(p, tag), text)?;
        }
    }
    Ok(())
}

fn execute(command: &Command) -> Result<i32> {
    let (io, cfg, out) = match command {
        Command::Validate(io) => {
            let cfg = load(io)?;
            let out = cmd_validate(&cfg)?;
            (io, cfg, out)
        }
        Command::Break(io) => {
            let cfg = load(io)?;
            let out = cmd_break(&cfg)?;
            (io, cfg, out)
        }
        Command::Certify(io) => {
            let cfg = load(io)?;
            let out = cmd_certify(&cfg)?;
            (io, cfg, out)
        }
        Command::Defect { io, partition } => {
            let p: Partition = partition.parse()?;
            let cfg = load(io)?;
            let out = cmd_defect(&cfg, &p)?;
            (io, cfg, out)
        }
        Command::Example { name, io } => {
            let cfg = match (name, &io.config) {
                (Some(n), None) => {
                    let c = builtin(n)?;
                    match io.window {
                        Some(w) => c.with_window(w)?,
                        None => c,
                    }
                }
                _ => load(io)?,
            };
            let out = cmd_example(&cfg)?;
            (io, cfg, out)
        }
    };
    emit(&out, io, &cfg)?;
    Ok(out.code)
}

/// Parses `args` (program name first) and runs the command; returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    EXIT_OK
                }
                _ => EXIT_CONFIG,
            };
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
