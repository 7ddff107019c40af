//! Command-line front end: loads configuration, runs sessions, sweeps and
//! calibrations, and writes their reports.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod emit;

use std::path::{Path, PathBuf};

use arbc_core::battery::calibrate_profile;
use arbc_core::pv::regen::regenerate_fit;
use arbc_core::pv::PvFitTable;
use arbc_core::simkit::{compare_sessions, run_session, sweep, Mode, SweepTable};
use clap::{Parser, Subcommand};
use log::{info, warn};
use thiserror::Error;

use crate::config::{load, load_grid, load_scenario, CalibrationConfig, RegenConfig};
use crate::emit::{emit_report, Comparison, Format, Report};

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;
pub const EXIT_IO: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(arbc_core::Error),
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// 2 for configuration problems, 3 for simulation failures, 4 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_IO,
            CliError::Core(_) => EXIT_RUNTIME,
        }
    }
}

impl From<arbc_core::Error> for CliError {
    fn from(e: arbc_core::Error) -> Self {
        match e {
            arbc_core::Error::Config { key, message } => CliError::Config { key, message },
            arbc_core::Error::Io { path, source } => CliError::Io { path, source },
            arbc_core::Error::Csv(e) if e.is_io_error() => match e.into_kind() {
                csv::ErrorKind::Io(source) => source.into(),
                _ => unreachable!("checked to be an I/O error"),
            },
            arbc_core::Error::Json(e) if e.is_io() => std::io::Error::from(e).into(),
            other => CliError::Core(other),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(source: std::io::Error) -> Self {
        CliError::Io {
            path: "<output>".into(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Simulate one charging session.
    Run,
    /// Run a scenario in both modes and report the savings.
    Compare,
    /// Run every cell of a parameter grid (the reference grid by default).
    Sweep,
    /// Fit the charging-profile shape to its session targets.
    CalibrateProfile,
    /// Rebuild the PV fit table from the diode model.
    RegenPvFit,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "arbc", version, about = "Adaptive resonant beam charging simulator")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// TOML configuration; defaults are used when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output file; standard output when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Time step override (s).
    #[arg(long, global = true, value_name = "SECONDS")]
    pub dt: Option<f64>,

    /// Charging mode override for `run`, or the only mode swept by `sweep`.
    #[arg(long, global = true, value_parser = parse_mode)]
    pub mode: Option<Mode>,

    /// Accepted for scripting; every run is deterministic and uses no seed.
    #[arg(long, global = true)]
    pub seedless: bool,

    /// Per-tick supplied-power curves of a sweep (CSV).
    #[arg(long, global = true, value_name = "PATH")]
    pub series: Option<PathBuf>,

    /// More log output; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    /// Only log errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

impl RunConfig {
    pub fn log_level(&self) -> log::LevelFilter {
        if self.quiet {
            return log::LevelFilter::Error;
        }
        match self.verbose {
            0 => log::LevelFilter::Warn,
            1 => log::LevelFilter::Info,
            2 => log::LevelFilter::Debug,
            _ => log::LevelFilter::Trace,
        }
    }

    /// Checks paths before any work is done.
    pub fn validate_paths(&self) -> Result<(), CliError> {
        if let Some(p) = &self.config {
            if !p.is_file() {
                return Err(CliError::Io {
                    path: p.clone(),
                    source: std::io::Error::new(std::io::ErrorKind::NotFound, "config file not found"),
                });
            }
        }
        for p in [&self.out, &self.series].into_iter().flatten() {
            let parent = p.parent().filter(|d| !d.as_os_str().is_empty());
            if let Some(dir) = parent {
                if !dir.is_dir() {
                    return Err(CliError::Io {
                        path: dir.to_path_buf(),
                        source: std::io::Error::new(
                            std::io::ErrorKind::NotFound,
                            "output directory does not exist",
                        ),
                    });
                }
            }
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(CliError::config("--dt", "must be a positive number of seconds"));
            }
        }
        Ok(())
    }
}

/// Runs the selected subcommand and writes its report.
pub fn execute(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.validate_paths()?;
    let config = cfg.config.as_deref();
    let report = match cfg.command {
        Command::Run => {
            let mut scenario = load_scenario(config)?;
            if let Some(dt) = cfg.dt {
                scenario.dt_s = dt;
            }
            if let Some(mode) = cfg.mode {
                scenario.mode = mode;
            }
            scenario.validate()?;
            let report = run_session(&scenario)?;
            info!(
                "{} session: battery {:.4} Wh, supplied {:.4} Wh over {:.4} h ({})",
                scenario.mode,
                report.battery_energy_wh,
                report.supplied_energy_wh,
                report.duration_h,
                report.termination_reason
            );
            Report::Session(report)
        }
        Command::Compare => {
            let mut scenario = load_scenario(config)?;
            if let Some(dt) = cfg.dt {
                scenario.dt_s = dt;
            }
            if cfg.mode.is_some() {
                warn!("--mode is ignored by compare, which runs both modes");
            }
            let rbc = run_session(&scenario.with_mode(Mode::Rbc))?;
            let arbc = run_session(&scenario.with_mode(Mode::Arbc))?;
            let savings = compare_sessions(&rbc, &arbc)?;
            info!(
                "battery saved {:.2} %, supplied saved {:.2} %",
                savings.battery_energy_saved_pct, savings.supplied_energy_saved_pct
            );
            Report::Comparison(Box::new(Comparison {
                rbc,
                arbc,
                savings,
            }))
        }
        Command::Sweep => {
            let mut grid = load_grid(config)?;
            if let Some(dt) = cfg.dt {
                grid.base.dt_s = dt;
            }
            if let Some(mode) = cfg.mode {
                grid.modes = vec![mode];
            }
            grid.include_series |= cfg.series.is_some();
            let table = if grid.is_empty() {
                warn!("sweep grid has an empty axis; writing no rows");
                SweepTable::default()
            } else {
                info!("sweeping {} cells", grid.cells().len());
                sweep(&grid)?
            };
            for row in table.rows.iter().filter(|r| r.error.is_some()) {
                warn!(
                    "cell {} nm {} {} km {} °C {} failed: {}",
                    row.cell.wavelength_nm,
                    row.cell.air.kind,
                    row.cell.radius_km,
                    row.cell.temp_c,
                    row.cell.mode,
                    row.error.as_deref().unwrap_or_default()
                );
            }
            if let Some(path) = &cfg.series {
                write_series(&table, path)?;
            }
            Report::Sweep(table)
        }
        Command::CalibrateProfile => {
            let mut cal: CalibrationConfig = load(config)?;
            if let Some(dt) = cfg.dt {
                cal.dt_s = dt;
            }
            let result = calibrate_profile(&cal.base, &cal.targets())?;
            info!(
                "cv_decay_tau_h = {:.6}, tc_duration_h = {:.6}, session energy {:.4} Wh",
                result.params.cv_decay_tau_h, result.params.tc_duration_h, result.run.energy_wh
            );
            Report::Calibration(result)
        }
        Command::RegenPvFit => {
            let regen_cfg: RegenConfig = load(config)?;
            let regen = regenerate_fit(PvFitTable::embedded(), &regen_cfg.settings()?)?;
            info!(
                "worst a2 deviation from the embedded table: {:.2} %",
                100.0 * regen.max_abs_a2_deviation()
            );
            Report::Regeneration(regen)
        }
    };
    emit_report(&report, cfg.format, cfg.out.as_deref())
}

fn write_series(table: &SweepTable, path: &Path) -> Result<(), CliError> {
    let file = std::fs::File::create(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    table.write_series_csv(std::io::BufWriter::new(file))?;
    Ok(())
}
