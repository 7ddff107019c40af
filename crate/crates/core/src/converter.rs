//! Ideal buck-boost DC-DC stage between the panel and the battery.
//!
//! The topology inverts polarity; ratios here are magnitudes and the
//! inversion is reported separately through [`OUTPUT_INVERTED`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The buck-boost output is negative with respect to its input.
pub const OUTPUT_INVERTED: bool = true;

/// Relative slack allowed when checking power conservation.
pub const POWER_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConductionMode {
    Continuous,
    Discontinuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConverterParams {
    pub inductance_h: f64,
    /// Switching period (s).
    pub switch_period_s: f64,
    pub mode: ConductionMode,
    /// Output power over input power; 1 for the lossless converter.
    pub efficiency: f64,
}

impl Default for ConverterParams {
    fn default() -> Self {
        Self {
            inductance_h: 100e-6,
            switch_period_s: 10e-6,
            mode: ConductionMode::Continuous,
            efficiency: 1.0,
        }
    }
}

impl ConverterParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.inductance_h > 0.0) {
            return Err(Error::config("inductance_h", "must be > 0"));
        }
        if !(self.switch_period_s > 0.0) {
            return Err(Error::config("switch_period_s", "must be > 0"));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::config("efficiency", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

fn check_duty(duty: f64) -> Result<()> {
    if duty > 0.0 && duty < 1.0 {
        Ok(())
    } else {
        Err(Error::domain("duty", duty, "must lie in (0, 1)"))
    }
}

/// `|V_out / V_in| = D / (1 - D)`.
pub fn continuous_voltage_ratio(duty: f64) -> Result<f64> {
    check_duty(duty)?;
    Ok(duty / (1.0 - duty))
}

/// `|V_out / V_in| = V_in D² t / (2 L I_in)`.
pub fn discontinuous_voltage_ratio(
    duty: f64,
    v_in: f64,
    i_in: f64,
    params: &ConverterParams,
) -> Result<f64> {
    check_duty(duty)?;
    if !(v_in > 0.0) {
        return Err(Error::domain("v_in", v_in, "must be > 0"));
    }
    if !(i_in > 0.0) {
        return Err(Error::domain("i_in", i_in, "must be > 0"));
    }
    Ok(v_in * duty * duty * params.switch_period_s / (2.0 * params.inductance_h * i_in))
}

/// Duty cycle that turns `v_in` into `v_out_target` in the configured mode.
pub fn solve_duty(v_in: f64, v_out_target: f64, i_in: f64, params: &ConverterParams) -> Result<f64> {
    if !(v_in > 0.0) {
        return Err(Error::domain("v_in", v_in, "must be > 0"));
    }
    if !(v_out_target > 0.0) {
        return Err(Error::domain("v_out_target", v_out_target, "must be > 0"));
    }
    let duty = match params.mode {
        ConductionMode::Continuous => {
            let r = v_out_target / v_in;
            r / (1.0 + r)
        }
        ConductionMode::Discontinuous => {
            if !(i_in > 0.0) {
                return Err(Error::domain("i_in", i_in, "must be > 0"));
            }
            (2.0 * params.inductance_h * i_in * v_out_target
                / (v_in * v_in * params.switch_period_s))
                .sqrt()
        }
    };
    if duty > 0.0 && duty < 1.0 {
        Ok(duty)
    } else {
        Err(Error::UnreachableConversion {
            v_in,
            v_out: v_out_target,
            duty,
        })
    }
}

/// Lossless conversion of `(i_in, v_in)` to the requested operating point.
pub fn convert(i_in: f64, v_in: f64, i_target: f64, v_target: f64) -> Result<(f64, f64)> {
    convert_with_efficiency(i_in, v_in, i_target, v_target, 1.0)
}

/// Conversion through a converter passing `efficiency` of its input power.
pub fn convert_with_efficiency(
    i_in: f64,
    v_in: f64,
    i_target: f64,
    v_target: f64,
    efficiency: f64,
) -> Result<(f64, f64)> {
    let available = i_in * v_in * efficiency;
    if !(i_in * v_in > 0.0) {
        return Err(Error::domain("i_in * v_in", i_in * v_in, "input power must be > 0"));
    }
    if !(i_target >= 0.0 && v_target >= 0.0) {
        return Err(Error::domain("i_target * v_target", i_target * v_target, "targets must be >= 0"));
    }
    let requested = i_target * v_target;
    if requested > available * (1.0 + POWER_TOLERANCE) {
        return Err(Error::InsufficientPower {
            requested_w: requested,
            available_w: available,
        });
    }
    Ok((i_target, v_target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn continuous_ratio_values() {
        assert!((continuous_voltage_ratio(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((continuous_voltage_ratio(2.0 / 3.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(continuous_voltage_ratio(1e-9).unwrap() < 1e-8);
        for bad in [0.0, 1.0, -0.2, 1.5] {
            assert!(continuous_voltage_ratio(bad).is_err());
        }
    }

    #[test]
    fn discontinuous_ratio_values() {
        let p = ConverterParams {
            inductance_h: 1e-4,
            switch_period_s: 1e-4,
            mode: ConductionMode::Discontinuous,
            efficiency: 1.0,
        };
        let r = discontinuous_voltage_ratio(0.5, 10.0, 1.0, &p).unwrap();
        assert!((r - 1.25).abs() < 1e-12);
        let double_l = ConverterParams {
            inductance_h: 2e-4,
            ..p
        };
        let r2 = discontinuous_voltage_ratio(0.5, 10.0, 1.0, &double_l).unwrap();
        assert!((r2 - r / 2.0).abs() < 1e-12);
        let r4 = discontinuous_voltage_ratio(0.4, 10.0, 1.0, &p).unwrap();
        let r1 = discontinuous_voltage_ratio(0.2, 10.0, 1.0, &p).unwrap();
        assert!((r4 - 4.0 * r1).abs() < 1e-12);
        assert!(discontinuous_voltage_ratio(0.5, 10.0, 0.0, &p).is_err());
        assert_eq!(solve_duty(10.0, 12.5, 1.0, &p).unwrap(), 0.5);
    }

    #[test]
    fn continuous_solve() {
        let p = ConverterParams::default();
        assert!((solve_duty(5.0, 5.0, 1.0, &p).unwrap() - 0.5).abs() < 1e-15);
        assert!(solve_duty(0.0, 5.0, 1.0, &p).is_err());
        assert!(solve_duty(5.0, -1.0, 1.0, &p).is_err());
    }

    #[test]
    fn unreachable_discontinuous_duty() {
        let p = ConverterParams {
            mode: ConductionMode::Discontinuous,
            ..ConverterParams::default()
        };
        assert!(matches!(
            solve_duty(1.0, 100.0, 10.0, &p),
            Err(Error::UnreachableConversion { .. })
        ));
    }

    #[test]
    fn conversion_power_checks() {
        assert_eq!(convert(1.0, 4.0, 0.8, 5.0).unwrap(), (0.8, 5.0));
        assert!(matches!(
            convert(1.0, 4.0, 2.0, 4.0),
            Err(Error::InsufficientPower { .. })
        ));
        let (i, v) = convert(1.0, 4.0, 1.0, 4.0).unwrap();
        assert_eq!(i * v, 4.0);
        assert!(convert(0.0, 4.0, 0.1, 1.0).is_err());
        assert!(convert_with_efficiency(1.0, 4.0, 1.0, 4.0, 0.9).is_err());
        assert!(convert_with_efficiency(1.0, 4.0, 0.9, 4.0, 0.9).is_ok());
    }

    proptest! {
        #[test]
        fn continuous_round_trip(v in 0.1f64..100.0, k in 0.01f64..50.0) {
            let p = ConverterParams::default();
            let d = solve_duty(v, k * v, 1.0, &p).unwrap();
            let r = continuous_voltage_ratio(d).unwrap();
            prop_assert!((r - k).abs() <= 1e-12 * k.max(1.0));
        }

        #[test]
        fn discontinuous_round_trip(v in 1.0f64..50.0, i in 0.05f64..5.0, d in 0.01f64..0.99) {
            let p = ConverterParams { mode: ConductionMode::Discontinuous, ..ConverterParams::default() };
            let ratio = discontinuous_voltage_ratio(d, v, i, &p).unwrap();
            if let Ok(back) = solve_duty(v, ratio * v, i, &p) {
                prop_assert!((back - d).abs() <= 1e-12 * d);
            }
        }

        #[test]
        fn continuous_ratio_increasing(d in 0.01f64..0.98, dd in 1e-6f64..0.01) {
            prop_assert!(continuous_voltage_ratio(d + dd).unwrap() > continuous_voltage_ratio(d).unwrap());
        }

        #[test]
        fn conversion_conserves_power(i in 0.01f64..5.0, v in 0.1f64..50.0, it in 0.0f64..5.0, vt in 0.0f64..50.0) {
            if let Ok((io, vo)) = convert(i, v, it, vt) {
                prop_assert!(io * vo <= i * v * (1.0 + POWER_TOLERANCE));
            }
        }
    }
}
