//! Feedback power control: the end-to-end affine map from supplied power to
//! battery power, its inverse, and one-tick ARBC and RBC steps.

use serde::{Deserialize, Serialize};

use crate::battery::{profile_step, ChargeState, ProfileParams, Stage};
use crate::converter::{convert_with_efficiency, solve_duty, ConverterParams};
use crate::error::{Error, Result};
use crate::optics::{
    attenuation_coefficient, transmission_efficiency, AirCondition,
    BeamWavelength, BeamWavelengthSpec,
};
use crate::pv::{battery_power_from_beam, find_mpp, pv_fit_coefficients, PvPanelSpec};

/// Relative tolerance on the power recovered by the forward chain.
pub const CHAIN_TOLERANCE: f64 = 1e-6;

/// Default upper bound on supplied power (W).
pub const DEFAULT_MAX_SUPPLY_W: f64 = 1e7;

/// Constants of the affine chain for one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkCoefficients {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    pub eta_bt: f64,
}

impl LinkCoefficients {
    pub fn new(a1: f64, b1: f64, a2: f64, b2: f64, eta_bt: f64) -> Result<Self> {
        let c = Self {
            a1,
            b1,
            a2,
            b2,
            eta_bt,
        };
        c.validate()?;
        Ok(c)
    }

    /// Coefficients from the built-in transmitter fit, fit table and
    /// attenuation model.
    pub fn for_scenario(
        wavelength: BeamWavelength,
        temp_c: f64,
        air: &AirCondition,
        radius_km: f64,
    ) -> Result<Self> {
        let optics = BeamWavelengthSpec::canonical(wavelength);
        let (a2, b2) = pv_fit_coefficients(wavelength, temp_c)?;
        let sigma = attenuation_coefficient(wavelength.nm(), air)?;
        let eta_bt = transmission_efficiency(sigma, radius_km)?;
        Self::new(optics.a1, optics.b1, a2, b2, eta_bt)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta_bt > 0.0 && self.eta_bt <= 1.0) {
            return Err(Error::domain("eta_bt", self.eta_bt, "must lie in (0, 1]"));
        }
        let slope = self.slope();
        if !(slope > 0.0 && slope.is_finite()) {
            return Err(Error::domain("a1 * a2 * eta_bt", slope, "must be > 0"));
        }
        if !(self.b1.is_finite() && self.b2.is_finite()) {
            return Err(Error::Degenerate("non-finite chain offset"));
        }
        Ok(())
    }

    /// `a1 * a2 * eta_bt`.
    pub fn slope(&self) -> f64 {
        self.a1 * self.a2 * self.eta_bt
    }

    /// `a2 * b1 * eta_bt + b2`.
    pub fn intercept(&self) -> f64 {
        self.a2 * self.b1 * self.eta_bt + self.b2
    }
}

/// Battery power reached from supplied power `p_s` through the whole chain.
pub fn end_to_end_battery_power(p_s: f64, c: &LinkCoefficients) -> f64 {
    (c.slope() * p_s + c.intercept()).max(0.0)
}

/// Supplied power that delivers `p_b_target` through the chain.
pub fn required_supply_power(p_b_target: f64, c: &LinkCoefficients, max_supply_w: f64) -> Result<f64> {
    if !(p_b_target > 0.0) {
        return Err(Error::domain("p_b_target", p_b_target, "must be > 0"));
    }
    c.validate()?;
    let p_s = (p_b_target - c.intercept()) / c.slope();
    if !(p_s <= max_supply_w) {
        return Err(Error::SupplyLimit {
            required_w: p_s,
            limit_w: max_supply_w,
        });
    }
    Ok(p_s)
}

/// One tick of the power chain. Powers in W, currents in A, voltages in V,
/// time in h. `duty` is `None` while the transmitter is idle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t_h: f64,
    pub p_s: f64,
    pub p_bt: f64,
    pub p_br: f64,
    pub p_pv: f64,
    pub p_b: f64,
    pub i_pv: f64,
    pub v_pv: f64,
    pub i_b: f64,
    pub v_b: f64,
    pub duty: Option<f64>,
}

impl StepRecord {
    fn idle(t_h: f64, v_b: f64) -> Self {
        Self {
            t_h,
            p_s: 0.0,
            p_bt: 0.0,
            p_br: 0.0,
            p_pv: 0.0,
            p_b: 0.0,
            i_pv: 0.0,
            v_pv: 0.0,
            i_b: 0.0,
            v_b,
            duty: None,
        }
    }
}

/// Everything a control step needs besides the charge state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub coefficients: LinkCoefficients,
    pub panel: PvPanelSpec,
    pub panel_area_cm2: f64,
    pub temp_c: f64,
    pub converter: ConverterParams,
    pub max_supply_w: f64,
}

impl Link {
    /// Drives the chain so that `p_b_target` reaches a battery held at `v_b`.
    pub fn deliver(&self, t_h: f64, p_b_target: f64, v_b: f64) -> Result<StepRecord> {
        if p_b_target == 0.0 {
            return Ok(StepRecord::idle(t_h, v_b));
        }
        if !(v_b > 0.0) {
            return Err(Error::domain("v_b", v_b, "must be > 0"));
        }
        let c = &self.coefficients;
        let efficiency = self.converter.efficiency;
        let p_pv_target = p_b_target / efficiency;
        let p_s = required_supply_power(p_pv_target, c, self.max_supply_w)?;

        let p_bt = (c.a1 * p_s + c.b1).max(0.0);
        let p_br = c.eta_bt * p_bt;
        let p_pv = battery_power_from_beam(p_br, c.a2, c.b2);
        let p_b = efficiency * p_pv;
        if (p_b - p_b_target).abs() > CHAIN_TOLERANCE * p_b_target {
            return Err(Error::ChainMismatch {
                delivered_w: p_b,
                requested_w: p_b_target,
            });
        }

        let mpp = find_mpp(&self.panel, p_br, self.panel_area_cm2, self.temp_c)?;
        let v_pv = mpp.v_mpp;
        let i_pv = p_pv / v_pv;
        let i_target = p_b / v_b;
        let duty = solve_duty(v_pv, v_b, i_pv, &self.converter)?;
        let (i_b, v_b) = convert_with_efficiency(i_pv, v_pv, i_target, v_b, efficiency)?;
        Ok(StepRecord {
            t_h,
            p_s,
            p_bt,
            p_br,
            p_pv,
            p_b,
            i_pv,
            v_pv,
            i_b,
            v_b,
            duty: Some(duty),
        })
    }
}

/// Chain record for the setpoints `state` currently holds.
pub fn arbc_record(state: &ChargeState, link: &Link) -> Result<StepRecord> {
    link.deliver(state.elapsed_h, state.p_pref, state.v_pref)
}

/// One feedback tick: supply exactly the preferred power, then let the
/// charger advance.
pub fn arbc_step(
    state: &ChargeState,
    link: &Link,
    profile: &ProfileParams,
    dt_h: f64,
) -> Result<(StepRecord, ChargeState)> {
    if state.stage == Stage::Terminated {
        return Err(Error::State("charge already terminated"));
    }
    let record = arbc_record(state, link)?;
    let next = profile_step(state, dt_h, profile)?;
    Ok((record, next))
}

/// One open-loop tick at fixed battery power, nominally 1 A at 4.2 V.
pub fn rbc_step(link: &Link, fixed_p_b: f64, v_b: f64, t_h: f64) -> Result<StepRecord> {
    if !(fixed_p_b > 0.0) {
        return Err(Error::domain("fixed_p_b", fixed_p_b, "must be > 0"));
    }
    link.deliver(t_h, fixed_p_b, v_b)
}
