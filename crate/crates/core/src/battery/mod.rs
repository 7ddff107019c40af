//! Li-ion CC-CV charging profile.
//!
//! The profile is a four-stage state machine: trickle charge (current ramps
//! up while the cell voltage climbs to the TC/CC threshold), constant
//! current (voltage rises linearly with delivered charge up to the
//! regulation voltage), constant voltage (current decays exponentially) and
//! termination. Its only output is the preferred current, voltage and power
//! the charger asks for at each instant.

mod calibrate;

pub use calibrate::{calibrate_profile, simulate_profile, CalibrationTargets, ProfileCalibration, ProfileRun};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack on time comparisons (h); absorbs accumulation of `dt` in floating point.
const TIME_EPS_H: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileParams {
    pub capacity_mah: f64,
    /// Cell voltage when charging starts (V).
    pub v_tc_start: f64,
    /// Trickle to constant-current threshold (V).
    pub v_tc_cc: f64,
    /// Constant-voltage regulation level (V).
    pub v_cv: f64,
    /// Current reached at the end of the trickle ramp (mA).
    pub i_tc_max: f64,
    /// Constant-current stage current (mA).
    pub i_cc: f64,
    /// Termination current during constant voltage (mA).
    pub i_min: f64,
    pub tc_duration_h: f64,
    /// Cell voltage rise per mAh delivered during constant current (V/mAh).
    pub cc_voltage_slope: f64,
    pub cv_decay_tau_h: f64,
    /// Maximum time spent in constant voltage (h).
    pub cv_timer_h: f64,
    /// Maximum session length (h).
    pub session_cutoff_h: f64,
}

impl Default for ProfileParams {
    /// Calibrated defaults, see [`calibrate_profile`]. `tc_duration_h` and
    /// `cc_voltage_slope` place the CC/CV switch at 60 % of capacity exactly
    /// 2.4 h before the 3.6 h cutoff; `cv_decay_tau_h` makes the session
    /// consume 5.96 Wh (1 s steps).
    fn default() -> Self {
        Self {
            capacity_mah: 1000.0,
            v_tc_start: 2.5,
            v_tc_cc: 3.0,
            v_cv: 4.2,
            i_tc_max: 200.0,
            i_cc: 700.0,
            i_min: 20.0,
            tc_duration_h: 0.4,
            cc_voltage_slope: 1.2 / 560.0,
            cv_decay_tau_h: 1.74231,
            cv_timer_h: 2.4,
            session_cutoff_h: 3.6,
        }
    }
}

impl ProfileParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: &str| Err(Error::config(key, msg));
        if !(self.capacity_mah > 0.0) {
            return bad("capacity_mah", "must be > 0");
        }
        if !(self.v_tc_start > 0.0 && self.v_tc_start < self.v_tc_cc) {
            return bad("v_tc_start", "must satisfy 0 < v_tc_start < v_tc_cc");
        }
        if !(self.v_tc_cc < self.v_cv) {
            return bad("v_tc_cc", "must be below v_cv");
        }
        if !(self.i_min >= 0.0 && self.i_min < self.i_tc_max) {
            return bad("i_min", "must satisfy 0 <= i_min < i_tc_max");
        }
        if !(self.i_tc_max <= self.i_cc) {
            return bad("i_tc_max", "must not exceed i_cc");
        }
        if !(self.i_cc <= self.capacity_mah) {
            return bad("i_cc", "must not exceed the 1C rate (capacity_mah mA)");
        }
        for (key, value) in [
            ("tc_duration_h", self.tc_duration_h),
            ("cc_voltage_slope", self.cc_voltage_slope),
            ("cv_decay_tau_h", self.cv_decay_tau_h),
            ("cv_timer_h", self.cv_timer_h),
            ("session_cutoff_h", self.session_cutoff_h),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return bad(key, "must be a positive finite number");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stage {
    TrickleCharge,
    ConstantCurrent,
    ConstantVoltage,
    Terminated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MinimumCurrent,
    CvTimer,
    SessionCutoff,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::MinimumCurrent => "minimum_current",
            Termination::CvTimer => "cv_timer",
            Termination::SessionCutoff => "session_cutoff",
        }
    }
}

/// Snapshot of the charger. A terminated state keeps the setpoints it held
/// at the instant of termination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargeState {
    pub stage: Stage,
    /// Preferred current (mA).
    pub i_pref: f64,
    /// Preferred voltage (V).
    pub v_pref: f64,
    /// Preferred power (W).
    pub p_pref: f64,
    pub charge_delivered_mah: f64,
    pub elapsed_h: f64,
    pub cv_elapsed_h: f64,
    /// Charge delivered when constant current began (mAh).
    pub cc_entry_charge_mah: f64,
    pub termination: Option<Termination>,
}

impl ChargeState {
    fn with_setpoint(mut self, i_ma: f64, v: f64) -> Self {
        self.i_pref = i_ma;
        self.v_pref = v;
        self.p_pref = i_ma * 1e-3 * v;
        self
    }

    fn terminated(mut self, why: Termination) -> Self {
        self.stage = Stage::Terminated;
        self.termination = Some(why);
        self
    }
}

/// Start of a session: trickle charge at zero current.
pub fn profile_init(params: &ProfileParams) -> Result<ChargeState> {
    params.validate()?;
    Ok(ChargeState {
        stage: Stage::TrickleCharge,
        i_pref: 0.0,
        v_pref: params.v_tc_start,
        p_pref: 0.0,
        charge_delivered_mah: 0.0,
        elapsed_h: 0.0,
        cv_elapsed_h: 0.0,
        cc_entry_charge_mah: 0.0,
        termination: None,
    })
}

fn termination_due(state: &ChargeState, params: &ProfileParams) -> Option<Termination> {
    if state.stage == Stage::ConstantVoltage {
        if state.i_pref < params.i_min {
            return Some(Termination::MinimumCurrent);
        }
        if state.cv_elapsed_h >= params.cv_timer_h - TIME_EPS_H {
            return Some(Termination::CvTimer);
        }
    }
    if state.elapsed_h >= params.session_cutoff_h - TIME_EPS_H {
        return Some(Termination::SessionCutoff);
    }
    None
}

/// Advances the profile by `dt_h` hours.
///
/// The current held by `state` flows for the whole step; the returned state
/// carries the setpoints for the next one. A state that already meets a
/// termination condition terminates without advancing.
pub fn profile_step(state: &ChargeState, dt_h: f64, params: &ProfileParams) -> Result<ChargeState> {
    if state.stage == Stage::Terminated {
        return Err(Error::State("cannot step a terminated charge"));
    }
    if !(dt_h > 0.0) {
        return Err(Error::domain("dt_h", dt_h, "must be > 0"));
    }
    if let Some(why) = termination_due(state, params) {
        return Ok(state.terminated(why));
    }

    let mut next = *state;
    next.charge_delivered_mah += state.i_pref * dt_h;
    next.elapsed_h += dt_h;

    next = match state.stage {
        Stage::TrickleCharge => {
            let frac = (next.elapsed_h / params.tc_duration_h).min(1.0);
            let v = params.v_tc_start + (params.v_tc_cc - params.v_tc_start) * frac;
            if frac >= 1.0 - TIME_EPS_H / params.tc_duration_h {
                next.stage = Stage::ConstantCurrent;
                next.cc_entry_charge_mah = next.charge_delivered_mah;
                next.with_setpoint(params.i_cc, params.v_tc_cc)
            } else {
                next.with_setpoint(params.i_tc_max * frac, v)
            }
        }
        Stage::ConstantCurrent => {
            let v = params.v_tc_cc
                + params.cc_voltage_slope * (next.charge_delivered_mah - next.cc_entry_charge_mah);
            if v >= params.v_cv {
                next.stage = Stage::ConstantVoltage;
                next.cv_elapsed_h = 0.0;
                next.with_setpoint(params.i_cc, params.v_cv)
            } else {
                next.with_setpoint(params.i_cc, v)
            }
        }
        Stage::ConstantVoltage => {
            next.cv_elapsed_h += dt_h;
            let i = params.i_cc * (-next.cv_elapsed_h / params.cv_decay_tau_h).exp();
            next.with_setpoint(i, params.v_cv)
        }
        Stage::Terminated => unreachable!(),
    };

    Ok(match termination_due(&next, params) {
        Some(why) => next.terminated(why),
        None => next,
    })
}

pub fn charge_terminated(state: &ChargeState, _params: &ProfileParams) -> bool {
    state.stage == Stage::Terminated
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const DT: f64 = 1.0 / 3600.0;

    fn run(params: &ProfileParams, dt: f64) -> Vec<ChargeState> {
        let mut s = profile_init(params).unwrap();
        let mut out = vec![s];
        while !charge_terminated(&s, params) {
            s = profile_step(&s, dt, params).unwrap();
            out.push(s);
            assert!(out.len() < 10_000_000, "runaway session");
        }
        out
    }

    #[test]
    fn init_defaults() {
        let p = ProfileParams::default();
        let s = profile_init(&p).unwrap();
        assert_eq!(s.stage, Stage::TrickleCharge);
        assert!(s.v_pref < 3.0);
        assert_eq!(s.p_pref, s.i_pref * 1e-3 * s.v_pref);
        assert_eq!(s.charge_delivered_mah, 0.0);
        assert!(!charge_terminated(&s, &p));
    }

    #[test]
    fn invalid_params_rejected() {
        let p = ProfileParams {
            v_tc_cc: 4.3,
            ..ProfileParams::default()
        };
        assert!(profile_init(&p).is_err());
        let p = ProfileParams {
            i_cc: 1500.0,
            ..ProfileParams::default()
        };
        assert!(matches!(profile_init(&p), Err(Error::Config { key, .. }) if key == "i_cc"));
        let p = ProfileParams {
            i_min: 250.0,
            ..ProfileParams::default()
        };
        assert!(profile_init(&p).is_err());
    }

    #[test]
    fn low_cv_current_terminates() {
        let p = ProfileParams::default();
        let s = ChargeState {
            stage: Stage::ConstantVoltage,
            elapsed_h: 2.0,
            cv_elapsed_h: 0.5,
            ..profile_init(&p).unwrap()
        }
        .with_setpoint(19.0, 4.2);
        let next = profile_step(&s, DT, &p).unwrap();
        assert!(charge_terminated(&next, &p));
        assert_eq!(next.termination, Some(Termination::MinimumCurrent));
    }

    #[test]
    fn session_cutoff_terminates() {
        let p = ProfileParams::default();
        let s = ChargeState {
            stage: Stage::ConstantCurrent,
            elapsed_h: 3.6,
            ..profile_init(&p).unwrap()
        }
        .with_setpoint(700.0, 3.9);
        let next = profile_step(&s, DT, &p).unwrap();
        assert!(charge_terminated(&next, &p));
        assert_eq!(next.termination, Some(Termination::SessionCutoff));
    }

    #[test]
    fn low_current_outside_cv_does_not_terminate() {
        // trickle charge starts from zero current
        let p = ProfileParams::default();
        let s = profile_step(&profile_init(&p).unwrap(), DT, &p).unwrap();
        assert_eq!(s.stage, Stage::TrickleCharge);
        assert!(s.i_pref < p.i_min);
    }

    #[test]
    fn stepping_terminated_state_is_an_error() {
        let p = ProfileParams::default();
        let done = *run(&p, 60.0 / 3600.0).last().unwrap();
        assert!(matches!(profile_step(&done, DT, &p), Err(Error::State(_))));
        let fresh = profile_init(&p).unwrap();
        assert!(profile_step(&fresh, 0.0, &p).is_err());
    }

    #[test]
    fn stages_never_regress_and_shapes_hold() {
        let p = ProfileParams::default();
        let states = run(&p, DT);
        assert!(states.windows(2).all(|w| w[1].stage >= w[0].stage));
        for stage in [Stage::TrickleCharge, Stage::ConstantCurrent, Stage::ConstantVoltage] {
            assert!(states.iter().any(|s| s.stage == stage), "{stage:?} never visited");
        }
        for w in states.windows(2) {
            if w[1].stage < Stage::ConstantVoltage {
                assert!(w[1].v_pref >= w[0].v_pref);
            }
            if w[0].stage == Stage::ConstantVoltage {
                assert!(w[1].i_pref <= w[0].i_pref);
            }
        }
        let bound = p.i_cc * 1e-3 * p.v_cv;
        for s in &states {
            assert!(s.v_pref <= p.v_cv * 1.01);
            assert!(s.p_pref <= bound + 1e-12);
            assert!((s.p_pref - s.i_pref * 1e-3 * s.v_pref).abs() < 1e-15);
        }
    }

    #[test]
    fn cc_stage_ends_between_half_and_seventy_percent() {
        let p = ProfileParams::default();
        assert_eq!(p.i_cc, 700.0);
        let states = run(&p, DT);
        let at_cv = states
            .iter()
            .find(|s| s.stage == Stage::ConstantVoltage)
            .unwrap();
        let frac = at_cv.charge_delivered_mah / p.capacity_mah;
        assert!((0.5..=0.7).contains(&frac), "{frac}");
    }

    #[test]
    fn determinism() {
        let p = ProfileParams::default();
        let a = run(&p, DT);
        let b = run(&p, DT);
        assert_eq!(a.len(), b.len());
        assert!(a
            .iter()
            .zip(&b)
            .all(|(x, y)| x.p_pref.to_bits() == y.p_pref.to_bits()
                && x.elapsed_h.to_bits() == y.elapsed_h.to_bits()));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn every_valid_profile_terminates(
            i_cc in 200.0f64..1000.0,
            tau in 0.05f64..5.0,
            tc in 0.05f64..1.0,
            cutoff in 0.5f64..6.0,
            dt_s in 5.0f64..120.0,
        ) {
            let p = ProfileParams {
                i_cc,
                cv_decay_tau_h: tau,
                tc_duration_h: tc,
                session_cutoff_h: cutoff,
                ..ProfileParams::default()
            };
            let states = run(&p, dt_s / 3600.0);
            let last = states.last().unwrap();
            prop_assert!(charge_terminated(last, &p));
            prop_assert!(last.elapsed_h <= cutoff + dt_s / 3600.0 + 1e-9);
            prop_assert!(states.windows(2).all(|w| w[1].stage >= w[0].stage));
            prop_assert!(states.iter().all(|s| s.v_pref <= p.v_cv * 1.01));
            prop_assert!(last.charge_delivered_mah <= p.i_cc * cutoff + 1e-9);
        }
    }
}
