//! Rebuilds the battery-power fit table from the single-diode model.
//!
//! For every tabulated temperature the panel is swept over a range of
//! received powers, each point is moved to its maximum power point, and a
//! least-squares line through `(P_br, P_mpp)` gives `(a2, b2)`. The aperture
//! the beam is spread over is not known, so one aperture per panel is
//! calibrated against the table at a single anchor temperature; every other
//! row is a prediction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::BeamWavelength;

use super::{find_mpp, PvFitTable, PvPanelSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct RegenSettings {
    /// Received beam powers the line is fitted through (W).
    pub p_br_grid: Vec<f64>,
    /// Temperature at which the aperture is calibrated (°C).
    pub anchor_temp_c: f64,
}

impl Default for RegenSettings {
    fn default() -> Self {
        Self {
            p_br_grid: (1..=20).map(f64::from).collect(),
            anchor_temp_c: 25.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegenRow {
    pub wavelength_nm: BeamWavelength,
    pub temp_c: f64,
    pub a2: f64,
    pub b2: f64,
    pub table_a2: f64,
    pub table_b2: f64,
}

impl RegenRow {
    pub fn a2_rel_dev(&self) -> f64 {
        (self.a2 - self.table_a2) / self.table_a2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aperture {
    pub wavelength_nm: BeamWavelength,
    pub area_cm2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PvFitRegeneration {
    pub apertures: Vec<Aperture>,
    pub rows: Vec<RegenRow>,
}

impl PvFitRegeneration {
    pub fn max_abs_a2_deviation(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.a2_rel_dev().abs())
            .fold(0.0, f64::max)
    }

    /// Whether the regenerated slope strictly falls between every pair of
    /// successive temperatures.
    pub fn a2_strictly_decreasing(&self, wavelength: BeamWavelength) -> bool {
        let a2: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.wavelength_nm == wavelength)
            .map(|r| r.a2)
            .collect();
        a2.windows(2).all(|w| w[1] < w[0])
    }

    /// Whether regenerated and tabulated slopes move in the same direction
    /// between every pair of successive temperatures.
    pub fn trend_matches_table(&self, wavelength: BeamWavelength) -> bool {
        let rows: Vec<&RegenRow> = self
            .rows
            .iter()
            .filter(|r| r.wavelength_nm == wavelength)
            .collect();
        rows.windows(2).all(|w| {
            (w[1].a2 - w[0].a2).signum() == (w[1].table_a2 - w[0].table_a2).signum()
        })
    }
}

/// Least-squares line through `(x, y)`; returns `(slope, intercept)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "need at least two points");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `(a2, b2)` of the diode model at one temperature and aperture.
pub fn fit_at(spec: &PvPanelSpec, area_cm2: f64, temp_c: f64, grid: &[f64]) -> Result<(f64, f64)> {
    let p_mpp = grid
        .iter()
        .map(|&p| find_mpp(spec, p, area_cm2, temp_c).map(|m| m.p_mpp))
        .collect::<Result<Vec<_>>>()?;
    Ok(linear_fit(grid, &p_mpp))
}

/// Aperture at which the fitted slope equals `target_a2` at `temp_c`.
///
/// The slope falls monotonically as the aperture grows, so bisection on
/// log-area over six decades is enough.
pub fn calibrate_aperture(
    spec: &PvPanelSpec,
    target_a2: f64,
    temp_c: f64,
    grid: &[f64],
) -> Result<f64> {
    let slope = |log_area: f64| fit_at(spec, log_area.exp(), temp_c, grid).map(|f| f.0);
    let (mut lo, mut hi) = ((1e-3f64).ln(), (1e3f64).ln());
    let (s_lo, s_hi) = (slope(lo)?, slope(hi)?);
    if !(s_lo >= target_a2 && s_hi <= target_a2) {
        return Err(Error::Degenerate("target slope not bracketed by aperture search"));
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if slope(mid)? > target_a2 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Regenerates every row of `table` for both canonical panels.
pub fn regenerate_fit(table: &PvFitTable, settings: &RegenSettings) -> Result<PvFitRegeneration> {
    let mut apertures = Vec::new();
    let mut rows = Vec::new();
    for wavelength in BeamWavelength::ALL {
        let spec = PvPanelSpec::canonical(wavelength);
        let (anchor_a2, _) = table.coefficients(wavelength, settings.anchor_temp_c)?;
        let area_cm2 =
            calibrate_aperture(&spec, anchor_a2, settings.anchor_temp_c, &settings.p_br_grid)?;
        apertures.push(Aperture {
            wavelength_nm: wavelength,
            area_cm2,
        });
        for row in table.rows_for(wavelength) {
            let (a2, b2) = fit_at(&spec, area_cm2, row.temp_c, &settings.p_br_grid)?;
            rows.push(RegenRow {
                wavelength_nm: wavelength,
                temp_c: row.temp_c,
                a2,
                b2,
                table_a2: row.a2,
                table_b2: row.b2,
            });
        }
    }
    Ok(PvFitRegeneration { apertures, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_fit_recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 0.6 * v - 0.1).collect();
        let (a, b) = linear_fit(&x, &y);
        assert!((a - 0.6).abs() < 1e-12 && (b + 0.1).abs() < 1e-12);
    }

    #[test]
    fn aperture_calibration_hits_anchor() {
        let spec = PvPanelSpec::canonical(BeamWavelength::Nm1550);
        let grid: Vec<f64> = (1..=20).map(f64::from).collect();
        let area = calibrate_aperture(&spec, 0.5649, 25.0, &grid).unwrap();
        let (a2, _) = fit_at(&spec, area, 25.0, &grid).unwrap();
        assert!((a2 - 0.5649).abs() < 1e-6, "{a2}");
    }

    #[test]
    fn frozen_apertures_match_calibration() {
        let regen = regenerate_fit(PvFitTable::embedded(), &RegenSettings::default()).unwrap();
        for a in &regen.apertures {
            let frozen = super::super::calibrated_aperture_cm2(a.wavelength_nm);
            assert!((a.area_cm2 - frozen).abs() < 1e-5 * frozen, "{a:?}");
        }
    }

    #[test]
    fn unreachable_slope_is_reported() {
        let spec = PvPanelSpec::canonical(BeamWavelength::Nm810);
        let grid = [1.0, 2.0, 3.0];
        assert!(calibrate_aperture(&spec, 1e9, 25.0, &grid).is_err());
    }
}
