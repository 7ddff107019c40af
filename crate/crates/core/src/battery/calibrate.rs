//! Fits the free shape parameters of the profile to session-level targets.
//!
//! Three targets pin three parameters:
//! - the CC/CV switch happens at `cc_end_fraction` of capacity, and
//! - it happens exactly `cv_timer_h` before the session cutoff, which fixes
//!   the trickle duration and the CC voltage slope in closed form;
//! - the session's integrated preferred power equals `energy_wh`, which
//!   fixes the CV decay constant (found by bisection; energy grows with it).

use serde::{Deserialize, Serialize};

use crate::constants::SECONDS_PER_HOUR;
use crate::error::{Error, Result};
use crate::numeric::trapezoid;

use super::{charge_terminated, profile_init, profile_step, ProfileParams, Stage, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTargets {
    pub energy_wh: f64,
    pub cc_end_fraction: f64,
    pub dt_h: f64,
}

impl Default for CalibrationTargets {
    fn default() -> Self {
        Self {
            energy_wh: 5.96,
            cc_end_fraction: 0.6,
            dt_h: 1.0 / SECONDS_PER_HOUR,
        }
    }
}

/// Summary of one profile-only session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRun {
    pub energy_wh: f64,
    pub duration_h: f64,
    pub charge_mah: f64,
    /// Delivered charge at the CC/CV switch as a fraction of capacity.
    pub cc_end_fraction: Option<f64>,
    pub cv_start_h: Option<f64>,
    pub termination: Option<Termination>,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCalibration {
    pub params: ProfileParams,
    pub targets: CalibrationTargets,
    pub run: ProfileRun,
}

/// Steps the profile alone from start to termination.
pub fn simulate_profile(params: &ProfileParams, dt_h: f64) -> Result<ProfileRun> {
    let mut state = profile_init(params)?;
    let mut t = vec![state.elapsed_h];
    let mut p = vec![state.p_pref];
    let mut cc_end = None;
    let mut cv_start = None;
    while !charge_terminated(&state, params) {
        let next = profile_step(&state, dt_h, params)?;
        if state.stage == Stage::ConstantCurrent && next.stage == Stage::ConstantVoltage {
            cc_end = Some(next.charge_delivered_mah / params.capacity_mah);
            cv_start = Some(next.elapsed_h);
        }
        state = next;
        t.push(state.elapsed_h);
        p.push(state.p_pref);
    }
    Ok(ProfileRun {
        energy_wh: trapezoid(&t, &p),
        duration_h: state.elapsed_h,
        charge_mah: state.charge_delivered_mah,
        cc_end_fraction: cc_end,
        cv_start_h: cv_start,
        termination: state.termination,
        steps: t.len() - 1,
    })
}

pub fn calibrate_profile(
    base: &ProfileParams,
    targets: &CalibrationTargets,
) -> Result<ProfileCalibration> {
    base.validate()?;
    if !(targets.cc_end_fraction > 0.0 && targets.cc_end_fraction < 1.0) {
        return Err(Error::config("cc_end_fraction", "must lie in (0, 1)"));
    }
    if !(targets.energy_wh > 0.0) {
        return Err(Error::config("energy_wh", "must be > 0"));
    }

    // Charge in mAh, currents in mA, times in h. With a linear trickle ramp
    // the trickle stage delivers i_tc_max * t_tc / 2, and constant current
    // takes the rest of the time up to the CV start:
    //   t_tc + (q_end - i_tc_max * t_tc / 2) / i_cc = cv_start
    let cv_start = base.session_cutoff_h - base.cv_timer_h;
    let q_end = targets.cc_end_fraction * base.capacity_mah;
    let tc_duration_h =
        (cv_start - q_end / base.i_cc) / (1.0 - base.i_tc_max / (2.0 * base.i_cc));
    if !(tc_duration_h > 0.0) {
        return Err(Error::config(
            "cc_end_fraction",
            "cannot reach the CC/CV switch in the time before the CV timer starts",
        ));
    }
    let q_cc = q_end - base.i_tc_max * tc_duration_h / 2.0;
    let cc_voltage_slope = (base.v_cv - base.v_tc_cc) / q_cc;

    let with_tau = |tau: f64| ProfileParams {
        tc_duration_h,
        cc_voltage_slope,
        cv_decay_tau_h: tau,
        ..*base
    };
    let energy = |tau: f64| simulate_profile(&with_tau(tau), targets.dt_h).map(|r| r.energy_wh);

    let (mut lo, mut hi) = (1e-3, 1e3);
    if !(energy(lo)? <= targets.energy_wh && energy(hi)? >= targets.energy_wh) {
        return Err(Error::config(
            "energy_wh",
            "target energy is not reachable by adjusting the CV decay constant",
        ));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if energy(mid)? < targets.energy_wh {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-9 {
            break;
        }
    }
    let params = with_tau(0.5 * (lo + hi));
    let run = simulate_profile(&params, targets.dt_h)?;
    Ok(ProfileCalibration {
        params,
        targets: *targets,
        run,
    })
}
