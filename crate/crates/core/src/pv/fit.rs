use std::io::{Read, Write};
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::BeamWavelength;

pub const CSV_HEADER: [&str; 4] = ["wavelength_nm", "temp_c", "a2", "b2"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PvFitRow {
    pub wavelength_nm: BeamWavelength,
    pub temp_c: f64,
    pub a2: f64,
    pub b2: f64,
}

/// Battery-power fit coefficients indexed by wavelength and cell temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct PvFitTable {
    rows: Vec<PvFitRow>,
}

#[rustfmt::skip]
const EMBEDDED: [(u32, f64, f64, f64); 22] = [
    (810, 0.0, 0.6084, -0.08382),
    (810, 5.0, 0.6087, -0.08506),
    (810, 10.0, 0.6089, -0.08628),
    (810, 15.0, 0.6092, -0.08749),
    (810, 20.0, 0.6094, -0.08868),
    (810, 25.0, 0.6096, -0.08987),
    (810, 30.0, 0.6098, -0.09102),
    (810, 35.0, 0.6100, -0.09217),
    (810, 40.0, 0.6102, -0.09331),
    (810, 45.0, 0.6103, -0.09443),
    (810, 50.0, 0.6105, -0.09557),
    (1550, 0.0, 0.6043, -0.1275),
    (1550, 5.0, 0.5964, -0.1294),
    (1550, 10.0, 0.5885, -0.1317),
    (1550, 15.0, 0.5806, -0.1338),
    (1550, 20.0, 0.5727, -0.1358),
    (1550, 25.0, 0.5649, -0.1382),
    (1550, 30.0, 0.5569, -0.1398),
    (1550, 35.0, 0.5491, -0.1424),
    (1550, 40.0, 0.5412, -0.1440),
    (1550, 45.0, 0.5334, -0.1464),
    (1550, 50.0, 0.5255, -0.1483),
];

impl PvFitTable {
    /// The measured coefficient table, 0–50 °C in 5 °C steps for both
    /// wavelengths.
    pub fn embedded() -> &'static PvFitTable {
        static TABLE: OnceLock<PvFitTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            let rows = EMBEDDED
                .iter()
                .map(|&(nm, temp_c, a2, b2)| PvFitRow {
                    wavelength_nm: BeamWavelength::try_from(nm).expect("embedded wavelength"),
                    temp_c,
                    a2,
                    b2,
                })
                .collect();
            PvFitTable::new(rows).expect("embedded table is valid")
        })
    }

    pub fn new(mut rows: Vec<PvFitRow>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            let key = |field: &str| format!("rows[{i}].{field}");
            if !(row.a2 > 0.0 && row.a2 < 1.0) {
                return Err(Error::config(key("a2"), format!("{} not in (0, 1)", row.a2)));
            }
            if !(row.b2 < 0.0) {
                return Err(Error::config(key("b2"), format!("{} must be negative", row.b2)));
            }
            if !row.temp_c.is_finite() {
                return Err(Error::config(key("temp_c"), "must be finite"));
            }
        }
        rows.sort_by(|a, b| {
            a.wavelength_nm
                .cmp(&b.wavelength_nm)
                .then(a.temp_c.total_cmp(&b.temp_c))
        });
        if let Some(dup) = rows
            .windows(2)
            .find(|w| w[0].wavelength_nm == w[1].wavelength_nm && w[0].temp_c == w[1].temp_c)
        {
            return Err(Error::config(
                "rows",
                format!("duplicate row for {} nm at {} °C", dup[0].wavelength_nm, dup[0].temp_c),
            ));
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[PvFitRow] {
        &self.rows
    }

    pub fn rows_for(&self, wavelength: BeamWavelength) -> impl Iterator<Item = &PvFitRow> {
        self.rows.iter().filter(move |r| r.wavelength_nm == wavelength)
    }

    /// `(a2, b2)` at `temp_c`; exact on tabulated rows, linear in temperature
    /// between them, and an error outside the tabulated span.
    pub fn coefficients(&self, wavelength: BeamWavelength, temp_c: f64) -> Result<(f64, f64)> {
        let rows: Vec<&PvFitRow> = self.rows_for(wavelength).collect();
        let (first, last) = match (rows.first(), rows.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => {
                return Err(Error::config(
                    "wavelength_nm",
                    format!("no fit rows for {wavelength} nm"),
                ))
            }
        };
        if !(temp_c >= first.temp_c && temp_c <= last.temp_c) {
            return Err(Error::OutOfRange {
                quantity: "temp_c",
                value: temp_c,
                min: first.temp_c,
                max: last.temp_c,
            });
        }
        if let Some(exact) = rows.iter().find(|r| r.temp_c == temp_c) {
            return Ok((exact.a2, exact.b2));
        }
        let upper = rows.iter().position(|r| r.temp_c > temp_c).unwrap_or(rows.len() - 1);
        let (lo, hi) = (rows[upper - 1], rows[upper]);
        let w = (temp_c - lo.temp_c) / (hi.temp_c - lo.temp_c);
        Ok((
            lo.a2 + w * (hi.a2 - lo.a2),
            lo.b2 + w * (hi.b2 - lo.b2),
        ))
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.iter().ne(CSV_HEADER.iter().copied()) {
            return Err(Error::config(
                "header",
                format!(
                    "expected `{}`, found `{}`",
                    CSV_HEADER.join(","),
                    header.iter().collect::<Vec<_>>().join(",")
                ),
            ));
        }
        let rows = rdr
            .deserialize::<PvFitRow>()
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(rows)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_csv_reader(file)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.wavelength_nm.to_string(),
                r.temp_c.to_string(),
                r.a2.to_string(),
                r.b2.to_string(),
            ])?;
        }
        w.flush().map_err(|source| Error::Io {
            path: "<csv>".into(),
            source,
        })?;
        Ok(())
    }
}

/// Coefficients from the embedded table.
pub fn pv_fit_coefficients(wavelength: BeamWavelength, temp_c: f64) -> Result<(f64, f64)> {
    PvFitTable::embedded().coefficients(wavelength, temp_c)
}

/// `max(0, a2 * P_br + b2)`.
pub fn battery_power_from_beam(p_br: f64, a2: f64, b2: f64) -> f64 {
    (a2 * p_br + b2).max(0.0)
}
