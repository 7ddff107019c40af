//! Parameter sweeps over wavelength, temperature, air, radius and mode.
//!
//! Cells run in parallel and are merged back in grid order, so the output
//! does not depend on scheduling.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::{AirCondition, AirKind, BeamWavelength};

use super::format::{format_sig, round_sig};
use super::{run_session, savings, Mode, Scenario};

pub const JSON_SCHEMA_VERSION: u32 = 1;

pub const CSV_COLUMNS: [&str; 13] = [
    "wavelength_nm",
    "temp_c",
    "air",
    "visibility_km",
    "radius_km",
    "mode",
    "battery_energy_wh",
    "supplied_energy_wh",
    "duration_h",
    "termination",
    "battery_saved_pct",
    "saved_pct",
    "error",
];

pub const SERIES_CSV_COLUMNS: [&str; 7] = [
    "wavelength_nm",
    "temp_c",
    "air",
    "radius_km",
    "mode",
    "t_h",
    "p_s_w",
];

/// Axes of a sweep. Every other scenario field comes from `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepGrid {
    pub wavelengths: Vec<BeamWavelength>,
    pub temps_c: Vec<f64>,
    pub airs: Vec<AirCondition>,
    pub radii_km: Vec<f64>,
    pub modes: Vec<Mode>,
    pub base: Scenario,
    /// Keep each cell's supplied-power curve.
    pub include_series: bool,
}

impl Default for SweepGrid {
    fn default() -> Self {
        reference_grid()
    }
}

/// Both wavelengths, 0/25/50 °C, the three typical air conditions and
/// 0.1/0.5/1 km, in both modes.
pub fn reference_grid() -> SweepGrid {
    SweepGrid {
        wavelengths: BeamWavelength::ALL.to_vec(),
        temps_c: vec![0.0, 25.0, 50.0],
        airs: AirKind::ALL.iter().map(|&k| AirCondition::typical(k)).collect(),
        radii_km: vec![0.1, 0.5, 1.0],
        modes: Mode::ALL.to_vec(),
        base: Scenario::default(),
        include_series: false,
    }
}

impl SweepGrid {
    /// Cells in lexicographic axis order.
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut cells = Vec::new();
        for &wavelength_nm in &self.wavelengths {
            for &temp_c in &self.temps_c {
                for &air in &self.airs {
                    for &radius_km in &self.radii_km {
                        for &mode in &self.modes {
                            cells.push(SweepCell {
                                wavelength_nm,
                                temp_c,
                                air,
                                radius_km,
                                mode,
                            });
                        }
                    }
                }
            }
        }
        cells
    }

    pub fn is_empty(&self) -> bool {
        self.wavelengths.is_empty()
            || self.temps_c.is_empty()
            || self.airs.is_empty()
            || self.radii_km.is_empty()
            || self.modes.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub wavelength_nm: BeamWavelength,
    pub temp_c: f64,
    pub air: AirCondition,
    pub radius_km: f64,
    pub mode: Mode,
}

impl SweepCell {
    pub fn scenario(&self, base: &Scenario) -> Scenario {
        Scenario {
            wavelength_nm: self.wavelength_nm,
            temp_c: self.temp_c,
            air: self.air,
            radius_km: self.radius_km,
            mode: self.mode,
            ..*base
        }
    }

    fn same_site(&self, other: &SweepCell) -> bool {
        self.wavelength_nm == other.wavelength_nm
            && self.temp_c == other.temp_c
            && self.air == other.air
            && self.radius_km == other.radius_km
    }
}

/// Summary of one cell. Energies are `None` when the cell failed, and the
/// savings are `None` unless both modes of the cell ran.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cell: SweepCell,
    pub battery_energy_wh: Option<f64>,
    pub supplied_energy_wh: Option<f64>,
    pub duration_h: Option<f64>,
    pub termination: Option<String>,
    pub battery_saved_pct: Option<f64>,
    /// Supplied-energy saving of ARBC over RBC at this cell (%).
    pub saved_pct: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesCurve {
    pub cell: SweepCell,
    pub t_h: Vec<f64>,
    pub p_s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub series: Vec<SeriesCurve>,
}

/// Runs every cell of `grid`. A failing cell is recorded in its row and
/// does not stop the sweep.
pub fn sweep(grid: &SweepGrid) -> Result<SweepTable> {
    if grid.is_empty() {
        return Err(Error::config("grid", "every sweep axis needs at least one value"));
    }
    let cells = grid.cells();
    let outcomes: Vec<_> = cells
        .par_iter()
        .map(|cell| run_session(&cell.scenario(&grid.base)))
        .collect();

    let mut rows = Vec::with_capacity(cells.len());
    let mut series = Vec::new();
    for (cell, outcome) in cells.iter().zip(outcomes) {
        rows.push(match outcome {
            Ok(report) => {
                if grid.include_series {
                    series.push(SeriesCurve {
                        cell: *cell,
                        t_h: report.records.iter().map(|r| r.t_h).collect(),
                        p_s: report.records.iter().map(|r| r.p_s).collect(),
                    });
                }
                SweepRow {
                    cell: *cell,
                    battery_energy_wh: Some(report.battery_energy_wh),
                    supplied_energy_wh: Some(report.supplied_energy_wh),
                    duration_h: Some(report.duration_h),
                    termination: Some(report.termination_reason),
                    battery_saved_pct: None,
                    saved_pct: None,
                    error: None,
                }
            }
            Err(e) => SweepRow {
                cell: *cell,
                battery_energy_wh: None,
                supplied_energy_wh: None,
                duration_h: None,
                termination: None,
                battery_saved_pct: None,
                saved_pct: None,
                error: Some(e.to_string()),
            },
        });
    }
    fill_savings(&mut rows);
    Ok(SweepTable { rows, series })
}

fn fill_savings(rows: &mut [SweepRow]) {
    let find = |rows: &[SweepRow], cell: &SweepCell, mode: Mode| {
        rows.iter()
            .position(|r| r.cell.mode == mode && r.cell.same_site(cell))
    };
    for i in 0..rows.len() {
        let cell = rows[i].cell;
        let (Some(ir), Some(ia)) = (find(rows, &cell, Mode::Rbc), find(rows, &cell, Mode::Arbc))
        else {
            continue;
        };
        let (r, a) = (&rows[ir], &rows[ia]);
        if let (Some(rb), Some(ab), Some(rs), Some(as_)) = (
            r.battery_energy_wh,
            a.battery_energy_wh,
            r.supplied_energy_wh,
            a.supplied_energy_wh,
        ) {
            let s = savings(rb, ab, rs, as_);
            rows[i].battery_saved_pct = Some(s.battery_energy_saved_pct);
            rows[i].saved_pct = Some(s.supplied_energy_saved_pct);
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_sig).unwrap_or_default()
}

fn io_error(e: std::io::Error) -> Error {
    Error::Io {
        path: "<output>".into(),
        source: e,
    }
}

impl SweepTable {
    pub fn row(&self, cell: &SweepCell) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.cell == *cell)
    }

    /// Copy with every number rounded the way it is emitted.
    pub fn rounded(&self) -> Self {
        let r = |x: Option<f64>| x.map(round_sig);
        Self {
            rows: self
                .rows
                .iter()
                .map(|row| SweepRow {
                    cell: SweepCell {
                        temp_c: round_sig(row.cell.temp_c),
                        radius_km: round_sig(row.cell.radius_km),
                        air: AirCondition {
                            visibility_km: round_sig(row.cell.air.visibility_km),
                            ..row.cell.air
                        },
                        ..row.cell
                    },
                    battery_energy_wh: r(row.battery_energy_wh),
                    supplied_energy_wh: r(row.supplied_energy_wh),
                    duration_h: r(row.duration_h),
                    battery_saved_pct: r(row.battery_saved_pct),
                    saved_pct: r(row.saved_pct),
                    ..row.clone()
                })
                .collect(),
            series: Vec::new(),
        }
    }

    /// One row per cell under [`CSV_COLUMNS`]; an empty table gives the
    /// header alone.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CSV_COLUMNS)?;
        for row in &self.rows {
            let c = &row.cell;
            w.write_record([
                c.wavelength_nm.to_string(),
                format_sig(c.temp_c),
                c.air.kind.to_string(),
                format_sig(c.air.visibility_km),
                format_sig(c.radius_km),
                c.mode.to_string(),
                opt(row.battery_energy_wh),
                opt(row.supplied_energy_wh),
                opt(row.duration_h),
                row.termination.clone().unwrap_or_default(),
                opt(row.battery_saved_pct),
                opt(row.saved_pct),
                row.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(io_error)?;
        Ok(())
    }

    /// Long-format supplied-power curves, one line per tick.
    pub fn write_series_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(SERIES_CSV_COLUMNS)?;
        for curve in &self.series {
            let c = &curve.cell;
            let axes = [
                c.wavelength_nm.to_string(),
                format_sig(c.temp_c),
                c.air.kind.to_string(),
                format_sig(c.radius_km),
                c.mode.to_string(),
            ];
            for (t, p) in curve.t_h.iter().zip(&curve.p_s) {
                let mut record = axes.to_vec();
                record.push(format_sig(*t));
                record.push(format_sig(*p));
                w.write_record(&record)?;
            }
        }
        w.flush().map_err(io_error)?;
        Ok(())
    }

    /// Versioned JSON nested wavelength → temperature → air → radius → mode.
    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        let doc = JsonDoc::from_rows(&self.rounded().rows);
        serde_json::to_writer_pretty(writer, &doc)?;
        Ok(())
    }

    pub fn from_json_reader<R: Read>(reader: R) -> Result<Self> {
        let doc: JsonDoc = serde_json::from_reader(reader)?;
        if doc.schema_version != JSON_SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!(
                    "unsupported version {}, expected {JSON_SCHEMA_VERSION}",
                    doc.schema_version
                ),
            ));
        }
        Ok(Self {
            rows: doc.into_rows(),
            series: Vec::new(),
        })
    }
}

#[derive(Serialize, Deserialize)]
struct JsonDoc {
    schema_version: u32,
    wavelengths: Vec<JsonWavelength>,
}

#[derive(Serialize, Deserialize)]
struct JsonWavelength {
    wavelength_nm: BeamWavelength,
    temperatures: Vec<JsonTemp>,
}

#[derive(Serialize, Deserialize)]
struct JsonTemp {
    temp_c: f64,
    airs: Vec<JsonAir>,
}

#[derive(Serialize, Deserialize)]
struct JsonAir {
    air: AirCondition,
    radii: Vec<JsonRadius>,
}

#[derive(Serialize, Deserialize)]
struct JsonRadius {
    radius_km: f64,
    modes: Vec<JsonMode>,
}

#[derive(Serialize, Deserialize)]
struct JsonMode {
    mode: Mode,
    battery_energy_wh: Option<f64>,
    supplied_energy_wh: Option<f64>,
    duration_h: Option<f64>,
    termination: Option<String>,
    battery_saved_pct: Option<f64>,
    saved_pct: Option<f64>,
    error: Option<String>,
}

/// Appends to the last group when `key` matches it, otherwise opens a new one.
fn group<T, K: PartialEq>(
    groups: &mut Vec<T>,
    key: K,
    key_of: impl Fn(&T) -> K,
    make: impl FnOnce(K) -> T,
) -> &mut T {
    if groups.last().map(|g| key_of(g) != key).unwrap_or(true) {
        groups.push(make(key));
    }
    groups.last_mut().expect("group just ensured")
}

impl JsonDoc {
    fn from_rows(rows: &[SweepRow]) -> Self {
        let mut wavelengths: Vec<JsonWavelength> = Vec::new();
        for row in rows {
            let c = &row.cell;
            let wl = group(&mut wavelengths, c.wavelength_nm, |g| g.wavelength_nm, |k| {
                JsonWavelength {
                    wavelength_nm: k,
                    temperatures: Vec::new(),
                }
            });
            let t = group(&mut wl.temperatures, c.temp_c, |g| g.temp_c, |k| JsonTemp {
                temp_c: k,
                airs: Vec::new(),
            });
            let a = group(&mut t.airs, c.air, |g| g.air, |k| JsonAir {
                air: k,
                radii: Vec::new(),
            });
            let r = group(&mut a.radii, c.radius_km, |g| g.radius_km, |k| JsonRadius {
                radius_km: k,
                modes: Vec::new(),
            });
            r.modes.push(JsonMode {
                mode: c.mode,
                battery_energy_wh: row.battery_energy_wh,
                supplied_energy_wh: row.supplied_energy_wh,
                duration_h: row.duration_h,
                termination: row.termination.clone(),
                battery_saved_pct: row.battery_saved_pct,
                saved_pct: row.saved_pct,
                error: row.error.clone(),
            });
        }
        Self {
            schema_version: JSON_SCHEMA_VERSION,
            wavelengths,
        }
    }

    fn into_rows(self) -> Vec<SweepRow> {
        let mut rows = Vec::new();
        for wl in self.wavelengths {
            for t in wl.temperatures {
                for a in t.airs {
                    for r in a.radii {
                        for m in r.modes {
                            rows.push(SweepRow {
                                cell: SweepCell {
                                    wavelength_nm: wl.wavelength_nm,
                                    temp_c: t.temp_c,
                                    air: a.air,
                                    radius_km: r.radius_km,
                                    mode: m.mode,
                                },
                                battery_energy_wh: m.battery_energy_wh,
                                supplied_energy_wh: m.supplied_energy_wh,
                                duration_h: m.duration_h,
                                termination: m.termination,
                                battery_saved_pct: m.battery_saved_pct,
                                saved_pct: m.saved_pct,
                                error: m.error,
                            });
                        }
                    }
                }
            }
        }
        rows
    }
}
