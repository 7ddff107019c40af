use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use arbc_cli::config::{load, load_grid, load_scenario, CalibrationConfig, RegenConfig};
use arbc_cli::{EXIT_CONFIG, EXIT_IO, EXIT_RUNTIME};
use arbc_core::optics::AirKind;
use arbc_core::simkit::{Scenario, SweepTable, CSV_COLUMNS};

fn arbc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arbc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn shipped(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn shipped_configs_load() {
    let run = load_scenario(Some(&configs().join("run.toml"))).unwrap();
    assert_eq!(run, Scenario::default());
    let cmp = load_scenario(Some(&configs().join("compare.toml"))).unwrap();
    assert_eq!(cmp.air.kind, AirKind::Haze);
    let grid = load_grid(Some(&configs().join("sweep.toml"))).unwrap();
    assert_eq!(grid.cells().len(), 108);
    let _: CalibrationConfig = load(Some(&configs().join("calibrate-profile.toml"))).unwrap();
    let regen: RegenConfig = load(Some(&configs().join("regen-pv-fit.toml"))).unwrap();
    assert_eq!(regen, RegenConfig::default());
}

#[test]
fn run_writes_per_tick_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let o = arbc(&["run", "--config", &shipped("run.toml"), "--dt", "60", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("t_h,p_s_w,p_bt_w,p_br_w,p_pv_w,p_b_w,i_pv_a,v_pv_v,i_b_a,v_b_v,duty\n"));
    assert_eq!(text.lines().count(), 1 + 217);
}

#[test]
fn compare_reports_savings_as_json() {
    let o = arbc(&["compare", "--dt", "30", "--format", "json"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["schema_version"], 1);
    let pct = doc["report"]["savings"]["battery_energy_saved_pct"].as_f64().unwrap();
    assert!((pct - 61.0).abs() < 1.5, "{pct}");
}

#[test]
fn sweep_emissions_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let grid = write(
        dir.path(),
        "grid.toml",
        "temps_c = [0.0]\nradii_km = [0.1, 1.0]\n[[airs]]\nkind = \"haze\"\n[base]\ndt_s = 60.0\n",
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = arbc(&["sweep", "--config", &grid, "--seedless", "--out", p.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
    assert_eq!(text.lines().count(), 1 + 8);
}

#[test]
fn empty_sweep_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let grid = write(dir.path(), "grid.toml", "radii_km = []\n");
    let o = arbc(&["sweep", "--config", &grid]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(String::from_utf8(o.stdout).unwrap(), CSV_COLUMNS.join(",") + "\n");
}

#[test]
fn sweep_json_and_series() {
    let dir = tempfile::tempdir().unwrap();
    let grid = write(
        dir.path(),
        "grid.toml",
        "wavelengths = [1550]\ntemps_c = [50.0]\nradii_km = [0.5]\n[[airs]]\nkind = \"clear_air\"\n[base]\ndt_s = 120.0\n",
    );
    let json = dir.path().join("sweep.json");
    let series = dir.path().join("series.csv");
    let o = arbc(&[
        "sweep", "--config", &grid, "--format", "json", "--mode", "arbc",
        "--out", json.to_str().unwrap(), "--series", series.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = SweepTable::from_json_reader(fs::File::open(&json).unwrap()).unwrap();
    assert_eq!(table.rows.len(), 1);
    assert!(table.rows[0].supplied_energy_wh.unwrap() > 0.0);
    assert!(fs::read_to_string(&series).unwrap().lines().count() > 100);
}

#[test]
fn calibrate_profile_reports_frozen_parameters() {
    let o = arbc(&["calibrate-profile", "--config", &shipped("calibrate-profile.toml")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("cv_decay_tau_h,1.7423"), "{text}");
    assert!(text.contains("session_energy_wh,5.96\n"), "{text}");
}

#[test]
fn regen_pv_fit_lists_every_row() {
    let o = arbc(&["regen-pv-fit", "--format", "csv"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 22);
}

#[test]
fn config_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("[air]\nkind = \"haze\"\nvisibility_km = 7.0\n", "air.visibility_km"),
        ("radius_km = -1.0\n", "radius_km"),
        ("[profile]\nbogus = 1\n", "profile"),
        ("wavelength_nm = 900\n", "wavelength_nm"),
    ];
    for (i, (text, key)) in cases.iter().enumerate() {
        let path = write(dir.path(), &format!("bad{i}.toml"), text);
        let o = arbc(&["run", "--config", &path]);
        assert_eq!(o.status.code(), Some(i32::from(EXIT_CONFIG)), "{text}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(key), "{text}: {err}");
    }
}

#[test]
fn exit_codes_distinguish_failures() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    let o = arbc(&["run", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(i32::from(EXIT_IO)));

    let o = arbc(&["run", "--out", dir.path().join("no/such/dir.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(i32::from(EXIT_IO)));

    let limited = write(dir.path(), "limit.toml", "max_supply_w = 10.0\n");
    let o = arbc(&["run", "--config", &limited]);
    assert_eq!(o.status.code(), Some(i32::from(EXIT_RUNTIME)));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tick"));

    let o = arbc(&["run", "--dt", "0"]);
    assert_eq!(o.status.code(), Some(i32::from(EXIT_CONFIG)));
}
