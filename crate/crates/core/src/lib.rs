//! Simulation of adaptive resonant beam charging: a laser power link whose
//! supply is steered each tick by the battery's preferred charging power,
//! compared against a fixed-power baseline.
//!
//! The chain runs transmitter ([`optics`]) → free-space beam → photovoltaic
//! receiver ([`pv`]) → DC-DC stage ([`converter`]) → Li-ion charger
//! ([`battery`]). [`control`] inverts it and [`simkit`] runs sessions and
//! sweeps.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod battery;
pub mod constants;
pub mod control;
pub mod converter;
pub mod error;
pub mod numeric;
pub mod optics;
pub mod pv;
pub mod simkit;

pub use error::{Error, Result};
