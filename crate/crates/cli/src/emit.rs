//! Report emission as CSV or versioned JSON.
//!
//! Every float is written with six significant digits so that repeated
//! runs produce byte-identical files.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use arbc_core::battery::ProfileCalibration;
use arbc_core::pv::regen::PvFitRegeneration;
use arbc_core::simkit::{format_sig, round_sig, SavingsReport, SessionReport, SweepTable};
use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub const SESSION_CSV_COLUMNS: [&str; 11] = [
    "t_h", "p_s_w", "p_bt_w", "p_br_w", "p_pv_w", "p_b_w", "i_pv_a", "v_pv_v", "i_b_a", "v_b_v",
    "duty",
];

pub const SAVINGS_CSV_COLUMNS: [&str; 9] = [
    "rbc_battery_energy_wh",
    "arbc_battery_energy_wh",
    "rbc_supplied_energy_wh",
    "arbc_supplied_energy_wh",
    "battery_saved_wh",
    "battery_saved_pct",
    "supplied_saved_wh",
    "supplied_saved_pct",
    "arbc_duration_h",
];

pub const REGEN_CSV_COLUMNS: [&str; 7] = [
    "wavelength_nm",
    "temp_c",
    "a2",
    "b2",
    "table_a2",
    "table_b2",
    "a2_rel_dev_pct",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Baseline and adaptive runs of one scenario with their savings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub rbc: SessionReport,
    pub arbc: SessionReport,
    pub savings: SavingsReport,
}

pub enum Report {
    Session(SessionReport),
    Comparison(Box<Comparison>),
    Sweep(SweepTable),
    Calibration(ProfileCalibration),
    Regeneration(PvFitRegeneration),
}

/// Writes `report` to `path`, or to stdout when no path is given.
pub fn emit_report(report: &Report, format: Format, path: Option<&Path>) -> Result<(), CliError> {
    let io_err = |source: io::Error| CliError::Io {
        path: path.map(Path::to_path_buf).unwrap_or_else(|| "<stdout>".into()),
        source,
    };
    let mut out: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(io_err)?)),
        None => Box::new(io::stdout().lock()),
    };
    write_report(report, format, &mut out)?;
    out.flush().map_err(io_err)
}

pub fn write_report<W: Write>(report: &Report, format: Format, out: W) -> Result<(), CliError> {
    match (report, format) {
        (Report::Sweep(table), Format::Csv) => table.write_csv(out)?,
        (Report::Sweep(table), Format::Json) => table.write_json(out)?,
        (Report::Session(r), Format::Csv) => session_csv(r, out)?,
        (Report::Comparison(c), Format::Csv) => savings_csv(c, out)?,
        (Report::Calibration(c), Format::Csv) => calibration_csv(c, out)?,
        (Report::Regeneration(r), Format::Csv) => regen_csv(r, out)?,
        (Report::Session(r), Format::Json) => versioned_json(r, out)?,
        (Report::Comparison(c), Format::Json) => versioned_json(c, out)?,
        (Report::Calibration(c), Format::Json) => versioned_json(c, out)?,
        (Report::Regeneration(r), Format::Json) => versioned_json(r, out)?,
    }
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map(format_sig).unwrap_or_default()
}

fn session_csv<W: Write>(r: &SessionReport, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SESSION_CSV_COLUMNS)?;
    for rec in &r.records {
        let mut row: Vec<String> = [
            rec.t_h, rec.p_s, rec.p_bt, rec.p_br, rec.p_pv, rec.p_b, rec.i_pv, rec.v_pv, rec.i_b,
            rec.v_b,
        ]
        .into_iter()
        .map(format_sig)
        .collect();
        row.push(opt(rec.duty));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn savings_csv<W: Write>(c: &Comparison, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SAVINGS_CSV_COLUMNS)?;
    let s = &c.savings;
    w.write_record(
        [
            c.rbc.battery_energy_wh,
            c.arbc.battery_energy_wh,
            c.rbc.supplied_energy_wh,
            c.arbc.supplied_energy_wh,
            s.absolute_saved_wh,
            s.battery_energy_saved_pct,
            s.supplied_saved_wh,
            s.supplied_energy_saved_pct,
            c.arbc.duration_h,
        ]
        .map(format_sig),
    )?;
    w.flush()?;
    Ok(())
}

fn calibration_csv<W: Write>(c: &ProfileCalibration, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["parameter", "value"])?;
    let Value::Object(params) = serde_json::to_value(c.params)? else {
        unreachable!("profile parameters serialize to a map");
    };
    for (key, value) in params {
        let text = value.as_f64().map(format_sig).unwrap_or_else(|| value.to_string());
        w.write_record([key, text])?;
    }
    w.write_record(["session_energy_wh".to_string(), format_sig(c.run.energy_wh)])?;
    w.write_record(["session_duration_h".to_string(), format_sig(c.run.duration_h)])?;
    w.flush()?;
    Ok(())
}

fn regen_csv<W: Write>(r: &PvFitRegeneration, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REGEN_CSV_COLUMNS)?;
    for row in &r.rows {
        let mut record = vec![row.wavelength_nm.to_string()];
        record.extend(
            [
                row.temp_c,
                row.a2,
                row.b2,
                row.table_a2,
                row.table_b2,
                100.0 * row.a2_rel_dev(),
            ]
            .map(format_sig),
        );
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Rounds every float in `value` to six significant digits.
fn round_numbers(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round_sig(x)))
            .map(Value::Number)
            .unwrap_or(Value::Null),
        Value::Array(items) => Value::Array(items.into_iter().map(round_numbers).collect()),
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, v)| (k, round_numbers(v)))
                .collect(),
        ),
        other => other,
    }
}

fn versioned_json<T: Serialize, W: Write>(payload: &T, out: W) -> Result<(), CliError> {
    let doc = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "report": round_numbers(serde_json::to_value(payload)?),
    });
    serde_json::to_writer_pretty(out, &doc)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use arbc_core::simkit::{run_session, Scenario};

    #[test]
    fn rounding_reaches_nested_numbers() {
        let v = serde_json::json!({"a": [1.23456789, {"b": 2.0000001}], "n": 3});
        let r = round_numbers(v);
        assert_eq!(r["a"][0], 1.23457);
        assert_eq!(r["a"][1]["b"], 2.0);
        assert_eq!(r["n"], 3);
    }

    #[test]
    fn session_json_reloads() {
        let report = run_session(&Scenario {
            dt_s: 60.0,
            ..Scenario::default()
        })
        .unwrap();
        let mut out = Vec::new();
        write_report(&Report::Session(report.clone()), Format::Json, &mut out).unwrap();
        let doc: Value = serde_json::from_slice(&out).unwrap();
        assert_eq!(doc["schema_version"], 1);
        let back: SessionReport = serde_json::from_value(doc["report"].clone()).unwrap();
        assert_eq!(back.records.len(), report.records.len());
        assert_eq!(back.battery_energy_wh, round_sig(report.battery_energy_wh));
        assert_eq!(back.scenario.wavelength_nm, report.scenario.wavelength_nm);
    }
}
