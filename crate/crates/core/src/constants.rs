//! Physical constants, CODATA values truncated to six significant digits.

/// Planck constant (J·s).
pub const PLANCK: f64 = 6.62607e-34;

/// Elementary charge (C).
pub const ELEMENTARY_CHARGE: f64 = 1.60218e-19;

/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.38065e-23;

/// Offset between the Celsius and Kelvin scales.
pub const ZERO_CELSIUS_K: f64 = 273.15;

pub const SECONDS_PER_HOUR: f64 = 3600.0;
