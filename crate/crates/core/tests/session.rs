use arbc_core::battery::{profile_init, profile_step, ProfileParams, Stage};
use arbc_core::numeric::rel_diff;
use arbc_core::optics::{AirCondition, AirKind, BeamWavelength};
use arbc_core::simkit::{compare_sessions, run_session, Mode, Scenario};
use proptest::prelude::*;

fn scenario(wavelength: BeamWavelength, kind: AirKind, radius_km: f64, temp_c: f64) -> Scenario {
    Scenario {
        wavelength_nm: wavelength,
        air: AirCondition::typical(kind),
        radius_km,
        temp_c,
        ..Scenario::default()
    }
}

#[test]
fn identical_scenarios_give_bit_identical_reports() {
    let s = Scenario::default();
    let a = run_session(&s).unwrap();
    let b = run_session(&s).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.supplied_energy_wh.to_bits(), b.supplied_energy_wh.to_bits());
}

#[test]
fn halving_the_step_barely_moves_energies() {
    for mode in Mode::ALL {
        let coarse = run_session(&Scenario {
            dt_s: 2.0,
            mode,
            ..Scenario::default()
        })
        .unwrap();
        let fine = run_session(&Scenario {
            dt_s: 1.0,
            mode,
            ..Scenario::default()
        })
        .unwrap();
        assert!(rel_diff(coarse.battery_energy_wh, fine.battery_energy_wh) < 1e-3);
        assert!(rel_diff(coarse.supplied_energy_wh, fine.supplied_energy_wh) < 1e-3);
    }
}

#[test]
fn default_sessions_match_reference_energies() {
    let arbc = run_session(&Scenario::default()).unwrap();
    let rbc = run_session(&Scenario::default().with_mode(Mode::Rbc)).unwrap();
    assert!(rel_diff(arbc.battery_energy_wh, 5.96) < 0.01);
    assert!(rel_diff(rbc.battery_energy_wh, 15.20) < 1e-9);
    assert!(rel_diff(arbc.supplied_energy_wh, 29.97) < 0.03);
    assert!(rel_diff(rbc.supplied_energy_wh, 64.20) < 0.02);
    let s = compare_sessions(&rbc, &arbc).unwrap();
    assert!((s.absolute_saved_wh - 9.24).abs() < 0.1);
    assert!((s.battery_energy_saved_pct - 61.0).abs() < 1.0);
}

#[test]
fn arbc_supply_follows_profile_stages() {
    let report = run_session(&Scenario::default()).unwrap();
    let params = ProfileParams::default();
    let mut state = profile_init(&params).unwrap();
    let dt_h = Scenario::default().dt_h();
    let mut stage_at = vec![state.stage];
    while state.stage != Stage::Terminated {
        state = profile_step(&state, dt_h, &params).unwrap();
        stage_at.push(state.stage);
    }
    assert_eq!(stage_at.len(), report.records.len());
    for (k, w) in report.records.windows(2).enumerate() {
        if stage_at[k] != stage_at[k + 1] && stage_at[k + 1] != Stage::Terminated {
            assert_ne!(w[0].p_s, w[1].p_s, "supply flat across stage change at tick {k}");
        }
    }
    let distinct: std::collections::BTreeSet<u64> =
        report.records.iter().map(|r| r.p_s.to_bits()).collect();
    assert!(distinct.len() > 100);
}

#[test]
fn chain_records_are_consistent() {
    for wavelength in BeamWavelength::ALL {
        let s = scenario(wavelength, AirKind::Haze, 0.5, 25.0);
        let c = s.coefficients().unwrap();
        let report = run_session(&s).unwrap();
        for r in report.records.iter().filter(|r| r.p_s > 0.0) {
            assert!((r.p_bt - (c.a1 * r.p_s + c.b1)).abs() <= 1e-9 * r.p_bt.max(1.0));
            assert!((r.p_br - c.eta_bt * r.p_bt).abs() <= 1e-12 * r.p_br.max(1.0));
            assert!((r.p_pv - (c.a2 * r.p_br + c.b2)).abs() <= 1e-9 * r.p_pv.max(1.0));
            assert!(r.p_b <= r.p_pv + 1e-12);
            assert!((r.i_b * r.v_b - r.p_b).abs() <= 1e-9 * r.p_b.max(1.0));
            let d = r.duty.unwrap();
            assert!(d > 0.0 && d < 1.0);
        }
    }
}

#[test]
fn fixed_power_supply_is_constant() {
    let s = scenario(BeamWavelength::Nm1550, AirKind::Fog, 0.1, 50.0).with_mode(Mode::Rbc);
    let report = run_session(&s).unwrap();
    let p0 = report.records[0].p_s;
    assert!(report.records.iter().all(|r| r.p_s == p0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn adaptive_always_beats_fixed(
        w in 0usize..2,
        k in 0usize..3,
        radius in 0.05f64..1.0,
        temp in 0.0f64..50.0,
    ) {
        let s = Scenario { dt_s: 20.0, ..scenario(BeamWavelength::ALL[w], AirKind::ALL[k], radius, temp) };
        let arbc = run_session(&s).unwrap();
        let rbc = run_session(&s.with_mode(Mode::Rbc)).unwrap();
        prop_assert!(arbc.supplied_energy_wh < rbc.supplied_energy_wh);
        prop_assert!(arbc.battery_energy_wh <= arbc.supplied_energy_wh);
        prop_assert!(rbc.battery_energy_wh <= rbc.supplied_energy_wh);
    }

    #[test]
    fn supply_grows_with_distance(w in 0usize..2, k in 0usize..3, r in 0.05f64..0.9, dr in 0.01f64..0.1) {
        let base = Scenario { dt_s: 30.0, ..scenario(BeamWavelength::ALL[w], AirKind::ALL[k], r, 10.0) };
        let near = run_session(&base).unwrap();
        let far = run_session(&Scenario { radius_km: r + dr, ..base }).unwrap();
        prop_assert!(far.supplied_energy_wh > near.supplied_energy_wh);
    }
}
