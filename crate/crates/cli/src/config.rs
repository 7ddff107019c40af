//! TOML configuration files.
//!
//! `run` and `compare` read a scenario table at the top level, `sweep`
//! reads a grid, `calibrate-profile` reads a base profile and targets and
//! `regen-pv-fit` reads the fit settings. Every table rejects unknown keys
//! and every omitted key takes its default.

use std::fs;
use std::path::Path;

use arbc_core::battery::{CalibrationTargets, ProfileParams};
use arbc_core::pv::regen::RegenSettings;
use arbc_core::simkit::{Scenario, SweepGrid};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationConfig {
    pub base: ProfileParams,
    pub energy_wh: f64,
    pub cc_end_fraction: f64,
    pub dt_s: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        let t = CalibrationTargets::default();
        Self {
            base: ProfileParams::default(),
            energy_wh: t.energy_wh,
            cc_end_fraction: t.cc_end_fraction,
            dt_s: t.dt_h * 3600.0,
        }
    }
}

impl CalibrationConfig {
    pub fn targets(&self) -> CalibrationTargets {
        CalibrationTargets {
            energy_wh: self.energy_wh,
            cc_end_fraction: self.cc_end_fraction,
            dt_h: self.dt_s / 3600.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegenConfig {
    /// Received beam powers the fit runs through (W).
    pub p_br_grid: Vec<f64>,
    pub anchor_temp_c: f64,
}

impl Default for RegenConfig {
    fn default() -> Self {
        let s = RegenSettings::default();
        Self {
            p_br_grid: s.p_br_grid,
            anchor_temp_c: s.anchor_temp_c,
        }
    }
}

impl RegenConfig {
    pub fn settings(&self) -> Result<RegenSettings, CliError> {
        if self.p_br_grid.len() < 2 {
            return Err(CliError::config("p_br_grid", "needs at least two powers"));
        }
        if self.p_br_grid.iter().any(|p| !(*p > 0.0)) {
            return Err(CliError::config("p_br_grid", "every power must be > 0"));
        }
        Ok(RegenSettings {
            p_br_grid: self.p_br_grid.clone(),
            anchor_temp_c: self.anchor_temp_c,
        })
    }
}

/// Parses `text` as `T`, naming the offending key path on failure.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    let de = toml::Deserializer::new(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let key = if path == "." { "<root>".to_string() } else { path };
        CliError::config(key, e.into_inner().message().trim().to_string())
    })
}

/// Reads `path`, or yields the defaults when no file is given.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|source| CliError::Io {
                path: p.to_path_buf(),
                source,
            })?;
            parse(&text)
        }
    }
}

/// Loads and validates a scenario.
pub fn load_scenario(path: Option<&Path>) -> Result<Scenario, CliError> {
    let scenario: Scenario = load(path)?;
    scenario.validate()?;
    Ok(scenario)
}

/// Loads and validates a sweep grid, checking every cell's scenario. A grid
/// with an empty axis is accepted and has no cells.
pub fn load_grid(path: Option<&Path>) -> Result<SweepGrid, CliError> {
    let grid: SweepGrid = load(path)?;
    grid.base.validate()?;
    for (i, air) in grid.airs.iter().enumerate() {
        air.validate()
            .map_err(|e| CliError::config(format!("airs[{i}].visibility_km"), e.to_string()))?;
    }
    for cell in grid.cells() {
        cell.scenario(&grid.base).validate()?;
    }
    Ok(grid)
}
