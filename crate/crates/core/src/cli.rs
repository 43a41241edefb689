//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime or data error, 2 invalid configuration,
//! 3 comparison below the threshold.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::Error;
use crate::grid::Axis;
use crate::io::{self, IoError};
use crate::reconstruct::{compare_maps, estimate_background, extract_features, reconstruct_wigner, ReconstructionReport};
use crate::scan::{effective_x, run_scan, CountMap, ScanConfig};
use crate::wigner::{analytic_map, WignerMap};

/// Caps the worker threads used for scans.
pub const THREADS_ENV: &str = "SAGNAC_WIGNER_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BELOW_THRESHOLD: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "sagnac-wigner", version, about = "Sagnac-interferometer Wigner function simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a raster scan and write counts.csv / counts.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to the config's outputs.dir).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the mean counts instead of Poisson draws.
        #[arg(long)]
        noiseless: bool,
    },
    /// Reconstruct a normalized Wigner map from a counts CSV.
    Reconstruct {
        counts: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed of the blocked-arm calibration runs.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write the closed-form Wigner function on the scan raster.
    Analytic {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two Wigner map CSVs; exit 3 when the correlation is too low.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 0.99)]
        threshold: f64,
    },
}

/// Failure with the exit code it maps to.
#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn runtime(message: impl ToString) -> Self {
        CliError { code: EXIT_RUNTIME, message: message.to_string() }
    }

    fn config(message: impl ToString) -> Self {
        CliError { code: EXIT_CONFIG, message: message.to_string() }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::runtime(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::runtime(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    ExperimentConfig::from_json(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn out_dir(out: Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    out.unwrap_or_else(|| cfg.outputs.dir.clone())
}

/// Mirror translations and tilts a simulate run would use.
fn raster(cfg: &ExperimentConfig) -> CliResult<(ScanConfig, Vec<f64>, Vec<f64>)> {
    let scan = cfg.scan_config().map_err(CliError::config)?;
    let grid = cfg.field_grid().map_err(CliError::config)?;
    Ok((scan, effective_x(&scan, &grid), scan.theta_points.positions()))
}

fn analytic_on_raster(cfg: &ExperimentConfig) -> CliResult<WignerMap> {
    let (_, xs, thetas) = raster(cfg)?;
    let k0 = cfg.interferometer().k0();
    let x_axis = Axis::from_values(xs)?;
    let k_axis = Axis::from_values(thetas.iter().map(|t| k0 * t.sin()).collect())?;
    analytic_map(&cfg.field, &x_axis, &k_axis).map_err(|e| match e {
        Error::Unsupported(_) => CliError::config(format!("field: {e}")),
        other => other.into(),
    })
}

pub fn cmd_simulate(config: &Path, out: Option<PathBuf>, seed: Option<u64>, noiseless: bool) -> CliResult<PathBuf> {
    let cfg = load_config(config)?;
    let state = cfg.state().map_err(|e| CliError::config(format!("field: {e}")))?;
    let det = cfg.detector().map_err(CliError::config)?;
    let (mut scan, _, _) = raster(&cfg)?;
    if let Some(s) = seed {
        scan.seed = s;
    }
    scan.noiseless |= noiseless;
    let map = with_thread_cap(|| run_scan(&state, &scan, &det, &cfg.interferometer()))??;
    let dir = out_dir(out, &cfg);
    if cfg.outputs.csv {
        io::write_atomic(&dir.join("counts.csv"), &io::counts_to_csv(&map))?;
    }
    if cfg.outputs.json {
        io::write_json(&dir.join("counts.json"), &map)?;
    }
    Ok(dir)
}

/// Report file contents: the reconstruction plus the inputs it came from.
#[derive(Debug, Serialize)]
struct ReportFile<'a> {
    field: &'a crate::field::FieldSpec,
    background_method: crate::config::BackgroundKind,
    noiseless_input: bool,
    #[serde(flatten)]
    report: &'a ReconstructionReport,
}

pub fn cmd_reconstruct(counts: &Path, config: &Path, out: Option<PathBuf>, seed: Option<u64>) -> CliResult<ReconstructionReport> {
    let mut cfg = load_config(config)?;
    if let Some(s) = seed {
        cfg.scan.seed = s;
    }
    let (scan, xs, thetas) = raster(&cfg)?;
    let table = io::read_counts_csv(counts, Some((xs.len(), thetas.len())))?;
    let close = |a: &[f64], b: &[f64]| {
        a.len() == b.len() && a.iter().zip(b).all(|(p, q)| (p - q).abs() <= 1e-12 * p.abs().max(q.abs()).max(1e-300))
    };
    if !close(&table.x_m, &xs) || !close(&table.theta_rad, &thetas) {
        return Err(CliError::runtime(format!(
            "{}: raster ({}x{}) does not match the config raster ({}x{})",
            counts.display(),
            table.x_m.len(),
            table.theta_rad.len(),
            xs.len(),
            thetas.len()
        )));
    }
    // noiseless files carry counts equal to rate * dwell exactly
    let noiseless = table.counts.iter().zip(table.mean_rate_hz.iter()).all(|(c, r)| *c == r * scan.dwell);
    let map = CountMap {
        config: scan,
        x_m: table.x_m,
        theta_rad: table.theta_rad,
        counts: table.counts,
        mean_rate_hz: table.mean_rate_hz,
        sampled: !noiseless,
    };
    let icfg = cfg.interferometer();
    let bg = estimate_background(&map, &cfg.background_method(noiseless).map_err(CliError::config)?)?;
    let mut report = reconstruct_wigner(&map, bg.counts, &icfg)?;
    report.warnings.extend(bg.warning);
    match extract_features(&report.wigner, cfg.field.kind(), &icfg) {
        Ok(f) => report.features = Some(f),
        Err(e) => report.warnings.push(format!("feature extraction failed: {e}")),
    }
    if let Ok(reference) = analytic_on_raster(&cfg) {
        report.comparison = compare_maps(&report.wigner, &reference).ok();
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let dir = out_dir(out, &cfg);
    if cfg.outputs.csv {
        io::write_atomic(&dir.join("wigner.csv"), &io::wigner_to_csv(&report.wigner))?;
    }
    if cfg.outputs.json {
        let file = ReportFile { field: &cfg.field, background_method: cfg.scan.background, noiseless_input: noiseless, report: &report };
        io::write_json(&dir.join("report.json"), &file)?;
    }
    Ok(report)
}

pub fn cmd_analytic(config: &Path, out: Option<PathBuf>) -> CliResult<WignerMap> {
    let cfg = load_config(config)?;
    let map = analytic_on_raster(&cfg)?;
    let dir = out_dir(out, &cfg);
    io::write_atomic(&dir.join("wigner_analytic.csv"), &io::wigner_to_csv(&map))?;
    Ok(map)
}

/// Returns the metrics and whether the Pearson correlation beats
/// `threshold`.
pub fn cmd_compare(a: &Path, b: &Path, threshold: f64) -> CliResult<(crate::reconstruct::MapMetrics, bool)> {
    let ma = io::read_wigner_csv(a)?;
    let mb = io::read_wigner_csv(b)?;
    let m = compare_maps(&ma, &mb)?;
    Ok((m, m.pearson > threshold))
}

fn thread_cap() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::runtime(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match thread_cap()? {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(CliError::runtime)?;
            Ok(pool.install(f))
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Simulate { config, out, seed, noiseless } => {
            let dir = cmd_simulate(&config, out, seed, noiseless)?;
            println!("wrote counts to {}", dir.display());
        }
        Command::Reconstruct { counts, config, out, seed } => {
            let report = cmd_reconstruct(&counts, &config, out, seed)?;
            println!("scale {} counts per unit W, background {} counts", report.scale, report.background);
            if let Some(f) = report.features {
                println!("{}", serde_json::to_string(&f).map_err(CliError::runtime)?);
            }
        }
        Command::Analytic { config, out } => {
            cmd_analytic(&config, out)?;
        }
        Command::Compare { a, b, threshold } => {
            let (m, pass) = cmd_compare(&a, &b, threshold)?;
            println!("l2_relative {}", m.l2_relative);
            println!("pearson {}", m.pearson);
            println!("peak_shift {}", m.peak_shift);
            return Ok(if pass { EXIT_OK } else { EXIT_BELOW_THRESHOLD });
        }
    }
    Ok(EXIT_OK)
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
