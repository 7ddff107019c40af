//! Transmitter and free-space link: supplied power, electricity-to-beam
//! conversion and Beer–Lambert attenuation through clear air, haze or fog.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::constants::{ELEMENTARY_CHARGE, PLANCK};
use crate::error::{Error, Result};

/// Reference wavelength of the visibility definition (nm).
const VISIBILITY_REFERENCE_NM: f64 = 550.0;

/// The two beam wavelengths the model carries measured data for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum BeamWavelength {
    Nm810,
    Nm1550,
}

impl BeamWavelength {
    pub const ALL: [BeamWavelength; 2] = [BeamWavelength::Nm810, BeamWavelength::Nm1550];

    pub fn nm(self) -> f64 {
        match self {
            BeamWavelength::Nm810 => 810.0,
            BeamWavelength::Nm1550 => 1550.0,
        }
    }
}

impl TryFrom<u32> for BeamWavelength {
    type Error = String;

    fn try_from(nm: u32) -> std::result::Result<Self, Self::Error> {
        match nm {
            810 => Ok(BeamWavelength::Nm810),
            1550 => Ok(BeamWavelength::Nm1550),
            other => Err(format!("unsupported wavelength {other} nm, expected 810 or 1550")),
        }
    }
}

impl From<BeamWavelength> for u32 {
    fn from(w: BeamWavelength) -> u32 {
        match w {
            BeamWavelength::Nm810 => 810,
            BeamWavelength::Nm1550 => 1550,
        }
    }
}

impl fmt::Display for BeamWavelength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", u32::from(*self))
    }
}

/// Affine fit of transmitter beam power against supplied electrical power,
/// `P_bt = a1 * P_s + b1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamWavelengthSpec {
    pub wavelength_nm: f64,
    /// Slope (W/W).
    pub a1: f64,
    /// Offset (W); negative, so small supplies sit below lasing threshold.
    pub b1: f64,
}

impl BeamWavelengthSpec {
    pub fn new(wavelength_nm: f64, a1: f64, b1: f64) -> Result<Self> {
        if !(wavelength_nm > 0.0) {
            return Err(Error::domain("wavelength_nm", wavelength_nm, "must be > 0"));
        }
        if !(a1 > 0.0) {
            return Err(Error::domain("a1", a1, "must be > 0"));
        }
        Ok(Self {
            wavelength_nm,
            a1,
            b1,
        })
    }

    /// Measured transmitter fits for the two supported wavelengths.
    pub fn canonical(wavelength: BeamWavelength) -> Self {
        match wavelength {
            BeamWavelength::Nm810 => Self {
                wavelength_nm: 810.0,
                a1: 0.445,
                b1: -0.75,
            },
            BeamWavelength::Nm1550 => Self {
                wavelength_nm: 1550.0,
                a1: 0.34,
                b1: -1.1,
            },
        }
    }

    /// Supplied power below which the fit predicts no beam.
    pub fn threshold_supply_w(&self) -> f64 {
        (-self.b1 / self.a1).max(0.0)
    }
}

/// Parameters of the physical electricity-to-beam relation
/// `P_bt = gamma * (h * nu / q) * (I_t - I_th)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalBeamParams {
    pub gamma: f64,
    pub nu_hz: f64,
    pub i_threshold_a: f64,
}

impl PhysicalBeamParams {
    pub fn new(gamma: f64, nu_hz: f64, i_threshold_a: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::domain("gamma", gamma, "must be > 0"));
        }
        if !(nu_hz > 0.0) {
            return Err(Error::domain("nu_hz", nu_hz, "must be > 0"));
        }
        if !(i_threshold_a >= 0.0) {
            return Err(Error::domain("i_threshold_a", i_threshold_a, "must be >= 0"));
        }
        Ok(Self {
            gamma,
            nu_hz,
            i_threshold_a,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AirKind {
    ClearAir,
    Haze,
    Fog,
}

impl AirKind {
    pub const ALL: [AirKind; 3] = [AirKind::ClearAir, AirKind::Haze, AirKind::Fog];

    pub fn as_str(self) -> &'static str {
        match self {
            AirKind::ClearAir => "clear_air",
            AirKind::Haze => "haze",
            AirKind::Fog => "fog",
        }
    }

    /// Representative visibility used when none is configured (km).
    pub fn default_visibility_km(self) -> f64 {
        match self {
            AirKind::ClearAir => 10.0,
            AirKind::Haze => 3.0,
            AirKind::Fog => 0.4,
        }
    }

    fn visibility_range_km(self) -> (f64, f64) {
        match self {
            AirKind::ClearAir => (6.0, 50.0),
            AirKind::Haze => (1.0, 6.0),
            AirKind::Fog => (0.0, 0.5),
        }
    }
}

impl fmt::Display for AirKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Air quality along the beam path. When deserialized without a
/// visibility, the kind's typical visibility is used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "AirConditionFields")]
pub struct AirCondition {
    pub kind: AirKind,
    pub visibility_km: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AirConditionFields {
    kind: AirKind,
    visibility_km: Option<f64>,
}

impl From<AirConditionFields> for AirCondition {
    fn from(f: AirConditionFields) -> Self {
        Self {
            kind: f.kind,
            visibility_km: f.visibility_km.unwrap_or(f.kind.default_visibility_km()),
        }
    }
}

impl AirCondition {
    pub fn new(kind: AirKind, visibility_km: f64) -> Result<Self> {
        let air = Self {
            kind,
            visibility_km,
        };
        air.validate()?;
        Ok(air)
    }

    /// The representative condition of each kind (10 km, 3 km, 0.4 km).
    pub fn typical(kind: AirKind) -> Self {
        Self {
            kind,
            visibility_km: kind.default_visibility_km(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let tau = self.visibility_km;
        let (lo, hi) = self.kind.visibility_range_km();
        let ok = match self.kind {
            // fog has no lower bound other than a positive visibility
            AirKind::Fog => tau > 0.0 && tau <= hi,
            _ => tau >= lo && tau <= hi,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(
                "visibility_km",
                tau,
                match self.kind {
                    AirKind::ClearAir => "clear air requires 6 <= visibility <= 50 km",
                    AirKind::Haze => "haze requires 1 <= visibility <= 6 km",
                    AirKind::Fog => "fog requires 0 < visibility <= 0.5 km",
                },
            ))
        }
    }

    /// Size-distribution exponent of the scattering particles.
    pub fn size_distribution(&self) -> f64 {
        match self.kind {
            AirKind::ClearAir => 1.3,
            AirKind::Haze => 0.16 * self.visibility_km + 0.34,
            AirKind::Fog => 0.0,
        }
    }
}

/// `P_s = I_t * V_t`.
pub fn supplied_electrical_power(i_t: f64, v_t: f64) -> Result<f64> {
    if !(i_t >= 0.0) {
        return Err(Error::domain("i_t", i_t, "must be >= 0"));
    }
    if !(v_t >= 0.0) {
        return Err(Error::domain("v_t", v_t, "must be >= 0"));
    }
    Ok(i_t * v_t)
}

/// Beam power from the stimulating current; zero at or below threshold.
pub fn physical_beam_power(i_t: f64, p: &PhysicalBeamParams) -> Result<f64> {
    if !(i_t >= 0.0) {
        return Err(Error::domain("i_t", i_t, "must be >= 0"));
    }
    let volts_per_photon = PLANCK * p.nu_hz / ELEMENTARY_CHARGE;
    Ok((p.gamma * volts_per_photon * (i_t - p.i_threshold_a)).max(0.0))
}

/// Transmitter beam power from the fitted affine relation, clamped at zero.
pub fn beam_power_from_supply(p_s: f64, spec: &BeamWavelengthSpec) -> f64 {
    (spec.a1 * p_s + spec.b1).max(0.0)
}

/// Attenuation coefficient σ in 1/km.
pub fn attenuation_coefficient(wavelength_nm: f64, air: &AirCondition) -> Result<f64> {
    if !(wavelength_nm > 0.0) {
        return Err(Error::domain("wavelength_nm", wavelength_nm, "must be > 0"));
    }
    air.validate()?;
    let theta = air.size_distribution();
    Ok(3.91 / air.visibility_km * (wavelength_nm / VISIBILITY_REFERENCE_NM).powf(-theta))
}

/// Fraction of beam power surviving `radius_km` of path, `exp(-σR)`.
pub fn transmission_efficiency(sigma: f64, radius_km: f64) -> Result<f64> {
    if !(sigma >= 0.0) {
        return Err(Error::domain("sigma", sigma, "must be >= 0"));
    }
    if !(radius_km >= 0.0) {
        return Err(Error::domain("radius_km", radius_km, "must be >= 0"));
    }
    Ok((-sigma * radius_km).exp())
}
