//! Session engine: steps the control loop over a whole charge, integrates
//! battery and supplied energy, and compares the two charging modes.

mod format;
mod sweep;

pub use format::{format_sig, round_sig, SIGNIFICANT_DIGITS};
pub use sweep::{
    sweep, reference_grid, SeriesCurve, SweepCell, SweepGrid, SweepRow, SweepTable, CSV_COLUMNS,
    JSON_SCHEMA_VERSION, SERIES_CSV_COLUMNS,
};

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::battery::{profile_init, profile_step, ProfileParams, Stage};
use crate::constants::SECONDS_PER_HOUR;
use crate::control::{arbc_record, rbc_step, Link, LinkCoefficients, StepRecord, DEFAULT_MAX_SUPPLY_W};
use crate::converter::ConverterParams;
use crate::error::{Error, Result};
use crate::numeric::trapezoid;
use crate::optics::{AirCondition, AirKind, BeamWavelength};
use crate::pv::{calibrated_aperture_cm2, PvPanelSpec};

/// Battery power of the fixed-power baseline (W).
pub const RBC_FIXED_POWER_W: f64 = 4.2;

/// Battery voltage of the fixed-power baseline (V).
pub const RBC_BATTERY_V: f64 = 4.2;

/// Baseline session length: 15.20 Wh drawn at 4.2 W.
pub const RBC_DURATION_H: f64 = 15.20 / RBC_FIXED_POWER_W;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Rbc,
    Arbc,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Rbc, Mode::Arbc];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Rbc => "rbc",
            Mode::Arbc => "arbc",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rbc" => Ok(Mode::Rbc),
            "arbc" => Ok(Mode::Arbc),
            other => Err(format!("unknown mode `{other}`, expected rbc or arbc")),
        }
    }
}

/// One simulation configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub wavelength_nm: BeamWavelength,
    /// PV cell temperature (°C).
    pub temp_c: f64,
    pub air: AirCondition,
    /// Transmitter to receiver distance (km).
    pub radius_km: f64,
    pub mode: Mode,
    pub dt_s: f64,
    pub rbc_fixed_power_w: f64,
    pub rbc_duration_h: f64,
    pub profile: ProfileParams,
    pub converter: ConverterParams,
    pub max_supply_w: f64,
    /// Ticks between a preference change and the supply following it.
    pub feedback_delay_ticks: usize,
    /// Receiver aperture (cm²); the calibrated one for the wavelength when
    /// unset.
    pub panel_area_cm2: Option<f64>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            wavelength_nm: BeamWavelength::Nm810,
            temp_c: 0.0,
            air: AirCondition::typical(AirKind::ClearAir),
            radius_km: 0.1,
            mode: Mode::Arbc,
            dt_s: 1.0,
            rbc_fixed_power_w: RBC_FIXED_POWER_W,
            rbc_duration_h: RBC_DURATION_H,
            profile: ProfileParams::default(),
            converter: ConverterParams::default(),
            max_supply_w: DEFAULT_MAX_SUPPLY_W,
            feedback_delay_ticks: 0,
            panel_area_cm2: None,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=50.0).contains(&self.temp_c) {
            return Err(Error::config("temp_c", "must lie in [0, 50] °C"));
        }
        self.air
            .validate()
            .map_err(|e| Error::config("air.visibility_km", e.to_string()))?;
        if !(self.radius_km >= 0.0 && self.radius_km.is_finite()) {
            return Err(Error::config("radius_km", "must be a finite number >= 0"));
        }
        if !(self.dt_s > 0.0 && self.dt_s.is_finite()) {
            return Err(Error::config("dt_s", "must be a positive finite number"));
        }
        if !(self.rbc_fixed_power_w > 0.0) {
            return Err(Error::config("rbc_fixed_power_w", "must be > 0"));
        }
        if !(self.rbc_duration_h > 0.0 && self.rbc_duration_h.is_finite()) {
            return Err(Error::config("rbc_duration_h", "must be a positive finite number"));
        }
        if !(self.max_supply_w > 0.0) {
            return Err(Error::config("max_supply_w", "must be > 0"));
        }
        if !(self.panel_area_cm2() > 0.0 && self.panel_area_cm2().is_finite()) {
            return Err(Error::config("panel_area_cm2", "must be a positive finite number"));
        }
        self.profile.validate().map_err(|e| prefix_key(e, "profile"))?;
        self.converter.validate().map_err(|e| prefix_key(e, "converter"))?;
        Ok(())
    }

    pub fn dt_h(&self) -> f64 {
        self.dt_s / SECONDS_PER_HOUR
    }

    pub fn panel_area_cm2(&self) -> f64 {
        self.panel_area_cm2
            .unwrap_or_else(|| calibrated_aperture_cm2(self.wavelength_nm))
    }

    pub fn with_mode(&self, mode: Mode) -> Self {
        Self { mode, ..*self }
    }

    pub fn coefficients(&self) -> Result<LinkCoefficients> {
        LinkCoefficients::for_scenario(self.wavelength_nm, self.temp_c, &self.air, self.radius_km)
    }

    /// The chain this scenario runs with its built-in coefficients.
    pub fn link(&self) -> Result<Link> {
        Ok(self.link_with(self.coefficients()?))
    }

    pub fn link_with(&self, coefficients: LinkCoefficients) -> Link {
        Link {
            coefficients,
            panel: PvPanelSpec::canonical(self.wavelength_nm),
            panel_area_cm2: self.panel_area_cm2(),
            temp_c: self.temp_c,
            converter: self.converter,
            max_supply_w: self.max_supply_w,
        }
    }
}

fn prefix_key(e: Error, prefix: &str) -> Error {
    match e {
        Error::Config { key, message } => Error::config(format!("{prefix}.{key}"), message),
        other => other,
    }
}

/// One simulated session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub scenario: Scenario,
    pub records: Vec<StepRecord>,
    pub battery_energy_wh: f64,
    pub supplied_energy_wh: f64,
    pub duration_h: f64,
    /// Why the session stopped; `fixed_duration` for the baseline.
    pub termination_reason: String,
}

impl SessionReport {
    fn from_records(scenario: Scenario, records: Vec<StepRecord>, reason: String) -> Self {
        let t: Vec<f64> = records.iter().map(|r| r.t_h).collect();
        let p_b: Vec<f64> = records.iter().map(|r| r.p_b).collect();
        let p_s: Vec<f64> = records.iter().map(|r| r.p_s).collect();
        Self {
            scenario,
            battery_energy_wh: trapezoid(&t, &p_b),
            supplied_energy_wh: trapezoid(&t, &p_s),
            duration_h: t.last().copied().unwrap_or(0.0),
            termination_reason: reason,
            records,
        }
    }
}

/// Runs `scenario` with its built-in chain.
pub fn run_session(scenario: &Scenario) -> Result<SessionReport> {
    scenario.validate()?;
    run_session_with(scenario, &scenario.link()?)
}

/// Runs `scenario` through an explicitly supplied chain.
pub fn run_session_with(scenario: &Scenario, link: &Link) -> Result<SessionReport> {
    scenario.validate()?;
    match scenario.mode {
        Mode::Arbc => run_arbc(scenario, link),
        Mode::Rbc => run_rbc(scenario, link),
    }
}

/// Records are taken at the start of every tick and once more at the
/// terminal state, so the energy integrals cover the whole session.
fn run_arbc(scenario: &Scenario, link: &Link) -> Result<SessionReport> {
    let dt_h = scenario.dt_h();
    let profile = &scenario.profile;
    let delay = scenario.feedback_delay_ticks;
    let mut state = profile_init(profile)?;
    // preferred powers of the last `delay` ticks, oldest first
    let mut pending: VecDeque<f64> = std::iter::repeat_n(0.0, delay).collect();
    let mut records = Vec::new();

    for tick in 0.. {
        let record = if delay == 0 {
            arbc_record(&state, link)
        } else {
            pending.push_back(state.p_pref);
            let target = pending.pop_front().unwrap_or_default();
            link.deliver(state.elapsed_h, target, state.v_pref)
        }
        .map_err(|e| e.at_tick(tick))?;
        records.push(record);
        if state.stage == Stage::Terminated {
            break;
        }
        state = profile_step(&state, dt_h, profile).map_err(|e| e.at_tick(tick))?;
    }

    let reason = state
        .termination
        .map(|t| t.as_str().to_string())
        .unwrap_or_default();
    Ok(SessionReport::from_records(*scenario, records, reason))
}

fn run_rbc(scenario: &Scenario, link: &Link) -> Result<SessionReport> {
    let dt_h = scenario.dt_h();
    let duration = scenario.rbc_duration_h;
    let full_ticks = (duration / dt_h).floor() as usize;
    let mut times: Vec<f64> = (0..=full_ticks).map(|k| k as f64 * dt_h).collect();
    if duration - times[full_ticks] > 1e-12 {
        times.push(duration);
    }
    let v_b = RBC_BATTERY_V;
    let records = times
        .iter()
        .enumerate()
        .map(|(tick, &t)| {
            rbc_step(link, scenario.rbc_fixed_power_w, v_b, t).map_err(|e| e.at_tick(tick))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SessionReport::from_records(
        *scenario,
        records,
        "fixed_duration".to_string(),
    ))
}

/// Savings of ARBC over RBC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SavingsReport {
    pub battery_energy_saved_pct: f64,
    pub supplied_energy_saved_pct: f64,
    /// Battery energy saved (Wh).
    pub absolute_saved_wh: f64,
    pub supplied_saved_wh: f64,
}

/// Compares a baseline and an adaptive run of the same scenario.
pub fn compare_sessions(rbc: &SessionReport, arbc: &SessionReport) -> Result<SavingsReport> {
    if rbc.scenario.mode != Mode::Rbc || arbc.scenario.mode != Mode::Arbc {
        return Err(Error::Comparison(format!(
            "expected an rbc and an arbc report, got {} and {}",
            rbc.scenario.mode, arbc.scenario.mode
        )));
    }
    if rbc.scenario.with_mode(Mode::Arbc) != arbc.scenario {
        return Err(Error::Comparison(
            "scenarios differ in more than the charging mode".to_string(),
        ));
    }
    Ok(savings(
        rbc.battery_energy_wh,
        arbc.battery_energy_wh,
        rbc.supplied_energy_wh,
        arbc.supplied_energy_wh,
    ))
}

pub(crate) fn savings(rbc_b: f64, arbc_b: f64, rbc_s: f64, arbc_s: f64) -> SavingsReport {
    let pct = |rbc: f64, arbc: f64| {
        if rbc == 0.0 {
            0.0
        } else {
            100.0 * (rbc - arbc) / rbc
        }
    };
    SavingsReport {
        battery_energy_saved_pct: pct(rbc_b, arbc_b),
        supplied_energy_saved_pct: pct(rbc_s, arbc_s),
        absolute_saved_wh: rbc_b - arbc_b,
        supplied_saved_wh: rbc_s - arbc_s,
    }
}
