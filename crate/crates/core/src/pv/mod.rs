//! Receiver photovoltaic panel.
//!
//! Two views of the same stage live here. The single-diode model with a
//! maximum-power-point search describes the panel physically; the
//! temperature-indexed affine fit (`P_b = a2 * P_br + b2`) is what the
//! simulation chain evaluates every tick. [`regen`] rebuilds the fit from
//! the diode model.

mod fit;
pub mod regen;
pub mod search;

pub use fit::{battery_power_from_beam, pv_fit_coefficients, PvFitRow, PvFitTable};

use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, ELEMENTARY_CHARGE, ZERO_CELSIUS_K};
use crate::error::{Error, Result};
use crate::optics::BeamWavelength;

use self::search::golden_section_max;

/// Voltage tolerance of the maximum-power-point search (V).
pub const MPP_VOLTAGE_TOL: f64 = 1e-6;

/// Aperture (cm²) the received beam is spread over unless configured.
///
/// Frozen from [`regen::calibrate_aperture`]: the area at which the diode
/// model's fitted slope equals the 25 °C row of the fit table.
pub fn calibrated_aperture_cm2(wavelength: BeamWavelength) -> f64 {
    match wavelength {
        BeamWavelength::Nm810 => 0.563668,
        BeamWavelength::Nm1550 => 6.44616,
    }
}

/// Temperature exponent of the diode saturation current.
const SATURATION_TEMP_EXPONENT: f64 = 3.0;

/// Single-diode panel description. `v_oc_ref` is the open-circuit voltage
/// of one cell at the reference irradiance and temperature; the panel
/// strings `series_cells` of them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PvPanelSpec {
    /// Short-circuit current at the reference irradiance (A).
    pub i_sc_ref: f64,
    /// Per-cell open-circuit voltage at the reference point (V).
    pub v_oc_ref: f64,
    /// Reference irradiance (W/cm²).
    pub irradiance_ref: f64,
    pub ideality_n: f64,
    pub series_cells: u32,
    pub temp_ref_c: f64,
    /// Band gap of the cell material (eV), drives the saturation current's
    /// temperature dependence.
    pub bandgap_ev: f64,
}

impl PvPanelSpec {
    /// GaAs panel for 810 nm and GaSb panel for 1550 nm.
    pub fn canonical(wavelength: BeamWavelength) -> Self {
        match wavelength {
            BeamWavelength::Nm810 => Self {
                i_sc_ref: 0.16732,
                v_oc_ref: 1.2,
                irradiance_ref: 36.5,
                ideality_n: 1.5,
                series_cells: 72,
                temp_ref_c: 25.0,
                bandgap_ev: 1.424,
            },
            BeamWavelength::Nm1550 => Self {
                i_sc_ref: 0.305,
                v_oc_ref: 0.464,
                irradiance_ref: 2.7187,
                ideality_n: 1.1,
                series_cells: 72,
                temp_ref_c: 120.0,
                bandgap_ev: 0.726,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.i_sc_ref > 0.0) {
            return Err(Error::domain("i_sc_ref", self.i_sc_ref, "must be > 0"));
        }
        if !(self.v_oc_ref > 0.0) {
            return Err(Error::domain("v_oc_ref", self.v_oc_ref, "must be > 0"));
        }
        if !(self.irradiance_ref > 0.0) {
            return Err(Error::domain("irradiance_ref", self.irradiance_ref, "must be > 0"));
        }
        if !(self.ideality_n >= 1.0) {
            return Err(Error::domain("ideality_n", self.ideality_n, "must be >= 1"));
        }
        if self.series_cells < 1 {
            return Err(Error::domain("series_cells", 0.0, "must be >= 1"));
        }
        if !(self.bandgap_ev > 0.0) {
            return Err(Error::domain("bandgap_ev", self.bandgap_ev, "must be > 0"));
        }
        kelvin(self.temp_ref_c)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MppResult {
    pub v_mpp: f64,
    pub i_mpp: f64,
    pub p_mpp: f64,
}

fn kelvin(temp_c: f64) -> Result<f64> {
    let t = temp_c + ZERO_CELSIUS_K;
    if t > 0.0 {
        Ok(t)
    } else {
        Err(Error::domain("temp_c", temp_c, "must be above absolute zero"))
    }
}

/// `n k T / q` with `T` in kelvin.
pub fn thermal_voltage(ideality_n: f64, temp_c: f64) -> Result<f64> {
    Ok(ideality_n * BOLTZMANN * kelvin(temp_c)? / ELEMENTARY_CHARGE)
}

/// Diode saturation current at `temp_c`.
///
/// Back-solved at the reference point so that the cell current vanishes at
/// `v_oc_ref`, then carried to other temperatures with the usual
/// `T^3 exp(-Eg / nkT)` law.
pub fn saturation_current(spec: &PvPanelSpec, temp_c: f64) -> Result<f64> {
    let t_ref = kelvin(spec.temp_ref_c)?;
    let t = kelvin(temp_c)?;
    let vm_ref = thermal_voltage(spec.ideality_n, spec.temp_ref_c)?;
    let i_s_ref = spec.i_sc_ref / (spec.v_oc_ref / vm_ref).exp_m1();

    // Eg/(n k) expressed with Eg in eV
    let gap_temp = spec.bandgap_ev * ELEMENTARY_CHARGE / (spec.ideality_n * BOLTZMANN);
    let scale = (t / t_ref).powf(SATURATION_TEMP_EXPONENT / spec.ideality_n)
        * (gap_temp * (1.0 / t_ref - 1.0 / t)).exp();
    Ok(i_s_ref * scale)
}

/// Short-circuit current for `p_br` watts spread over `area_cm2`.
pub fn short_circuit_current(spec: &PvPanelSpec, p_br: f64, area_cm2: f64) -> f64 {
    spec.i_sc_ref * (p_br / area_cm2) / spec.irradiance_ref
}

/// Panel output current at panel voltage `v`.
pub fn pv_current(
    v: f64,
    spec: &PvPanelSpec,
    p_br: f64,
    area_cm2: f64,
    temp_c: f64,
) -> Result<f64> {
    if !(v >= 0.0) {
        return Err(Error::domain("v", v, "must be >= 0"));
    }
    check_illumination(p_br, area_cm2)?;
    let diode = Diode::new(spec, p_br, area_cm2, temp_c)?;
    Ok(diode.current(v))
}

/// Panel voltage at which the output current falls to zero.
pub fn open_circuit_voltage(
    spec: &PvPanelSpec,
    p_br: f64,
    area_cm2: f64,
    temp_c: f64,
) -> Result<f64> {
    check_illumination(p_br, area_cm2)?;
    Ok(Diode::new(spec, p_br, area_cm2, temp_c)?.open_circuit_voltage())
}

/// Maximum power point on `[0, V_oc]` by golden-section search.
pub fn find_mpp(spec: &PvPanelSpec, p_br: f64, area_cm2: f64, temp_c: f64) -> Result<MppResult> {
    check_illumination(p_br, area_cm2)?;
    if p_br == 0.0 {
        return Err(Error::Degenerate("no received beam power to convert"));
    }
    let diode = Diode::new(spec, p_br, area_cm2, temp_c)?;
    let v_oc = diode.open_circuit_voltage();
    let best = golden_section_max(|v| v * diode.current(v), 0.0, v_oc, MPP_VOLTAGE_TOL);
    let i_mpp = diode.current(best.x);
    Ok(MppResult {
        v_mpp: best.x,
        i_mpp,
        p_mpp: best.x * i_mpp,
    })
}

fn check_illumination(p_br: f64, area_cm2: f64) -> Result<()> {
    if !(p_br >= 0.0) {
        return Err(Error::domain("p_br", p_br, "must be >= 0"));
    }
    if !(area_cm2 > 0.0) {
        return Err(Error::domain("panel_area_cm2", area_cm2, "must be > 0"));
    }
    Ok(())
}

/// Diode equation with everything that does not depend on voltage resolved.
struct Diode {
    i_sc: f64,
    i_s: f64,
    vm: f64,
    cells: f64,
}

impl Diode {
    fn new(spec: &PvPanelSpec, p_br: f64, area_cm2: f64, temp_c: f64) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            i_sc: short_circuit_current(spec, p_br, area_cm2),
            i_s: saturation_current(spec, temp_c)?,
            vm: thermal_voltage(spec.ideality_n, temp_c)?,
            cells: f64::from(spec.series_cells),
        })
    }

    fn current(&self, v: f64) -> f64 {
        self.i_sc - self.i_s * (v / self.cells / self.vm).exp_m1()
    }

    fn open_circuit_voltage(&self) -> f64 {
        self.cells * self.vm * (self.i_sc / self.i_s).ln_1p()
    }
}
