use std::f64::consts::PI;

use pcc_squeeze::experiments::{
    delta_grid, locate_transition, read_sweep_csv, read_timeseries_csv, run_sweep, run_timeseries,
    run_validation, sweep_point, write_sweep_csv, write_timeseries_csv, SweepRow, TimeSeriesRow,
    SWEEP_SCHEMA, TIMESERIES_SCHEMA,
};
use pcc_squeeze::squeezing::{initial_moments, xi_squared};
use pcc_squeeze::{EnsembleParams, Error, ReservoirParams, TimeGrid};

fn ensemble() -> EnsembleParams {
    EnsembleParams::new(10, 0.15 * PI).unwrap()
}

fn to_string(f: impl FnOnce(&mut Vec<u8>)) -> String {
    let mut buf = Vec::new();
    f(&mut buf);
    String::from_utf8(buf).unwrap()
}

#[test]
fn timeseries_starts_at_the_initial_squeezing() {
    let p = ReservoirParams::isotropic(-5.0, 1.0).unwrap();
    let rows = run_timeseries(&p, &ensemble(), &TimeGrid::uniform(5.0, 50).unwrap()).unwrap();
    assert_eq!(rows.len(), 51);
    assert_eq!(rows[0].t, 0.0);
    let z0 = xi_squared(&initial_moments(&ensemble()), 10).unwrap().zeta2;
    assert!((rows[0].zeta2.unwrap() - z0).abs() <= 1e-12);
    assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.population)));
}

#[test]
fn timeseries_csv_is_deterministic_and_round_trips() {
    let p = ReservoirParams::anisotropic(0.0, 1.0, 100.0).unwrap();
    let rows = run_timeseries(&p, &ensemble(), &TimeGrid::uniform(2.0, 20).unwrap()).unwrap();
    let a = to_string(|b| write_timeseries_csv(b, &rows).unwrap());
    let again = run_timeseries(&p, &ensemble(), &TimeGrid::uniform(2.0, 20).unwrap()).unwrap();
    let b = to_string(|b| write_timeseries_csv(b, &again).unwrap());
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(lines.next(), Some(TIMESERIES_SCHEMA));
    assert_eq!(lines.next(), Some("t,population,xi2,zeta2"));
    assert_eq!(read_timeseries_csv(a.as_bytes()).unwrap(), rows);
}

#[test]
fn missing_squeezing_is_an_empty_field() {
    let rows = [TimeSeriesRow {
        t: 1.5,
        population: 0.5,
        xi2: None,
        zeta2: None,
    }];
    let text = to_string(|b| write_timeseries_csv(b, &rows).unwrap());
    assert_eq!(text.lines().nth(2), Some("1.5,0.5,,"));
    assert_eq!(read_timeseries_csv(text.as_bytes()).unwrap(), rows);
}

#[test]
fn empty_outputs_keep_their_headers() {
    let t = to_string(|b| write_timeseries_csv(b, &[]).unwrap());
    assert_eq!(t, format!("{TIMESERIES_SCHEMA}\nt,population,xi2,zeta2\n"));
    let s = to_string(|b| write_sweep_csv(b, &[]).unwrap());
    assert_eq!(
        s,
        format!("{SWEEP_SCHEMA}\ndelta,steady_population,zeta2_inf,bound_state\n")
    );
    assert!(read_sweep_csv(s.as_bytes()).unwrap().is_empty());
}

#[test]
fn sweep_csv_round_trips() {
    let p = ReservoirParams::anisotropic(0.0, 1.0, 100.0).unwrap();
    let rows = run_sweep(&p, (-1.0, 1.0), 21, &ensemble()).unwrap();
    let text = to_string(|b| write_sweep_csv(b, &rows).unwrap());
    assert_eq!(
        text.lines().nth(1),
        Some("delta,steady_population,zeta2_inf,bound_state")
    );
    assert_eq!(read_sweep_csv(text.as_bytes()).unwrap(), rows);
}

#[test]
fn anisotropic_squeezing_survives_only_with_a_bound_state() {
    let p = ReservoirParams::anisotropic(0.0, 1.0, 100.0).unwrap();
    let rows = run_sweep(&p, (-1.0, 1.0), 201, &ensemble()).unwrap();
    for r in &rows {
        assert_eq!(
            r.zeta2_inf > 0.0,
            r.bound_state_present,
            "delta {}",
            r.delta
        );
        if !r.bound_state_present {
            assert_eq!(r.steady_population, 0.0);
        }
    }
}

#[test]
fn isotropic_squeezing_decreases_with_detuning() {
    let p = ReservoirParams::isotropic(0.0, 1.0).unwrap();
    let rows = run_sweep(&p, (-10.0, 10.0), 400, &ensemble()).unwrap();
    assert!(rows.iter().all(|r| r.bound_state_present));
    for w in rows.windows(2) {
        assert!(w[1].zeta2_inf <= w[0].zeta2_inf + 1e-9, "{:?}", w);
    }
}

#[test]
fn sweep_rows_follow_the_grid() {
    let p = ReservoirParams::isotropic(0.0, 1.0).unwrap();
    let rows = run_sweep(&p, (-2.0, 2.0), 9, &ensemble()).unwrap();
    let grid = delta_grid(-2.0, 2.0, 9).unwrap();
    assert_eq!(rows.iter().map(|r| r.delta).collect::<Vec<_>>(), grid);
    assert_eq!(rows[3], sweep_point(&p, &ensemble(), grid[3]).unwrap());
}

#[test]
fn delta_grid_rejects_bad_ranges() {
    assert!(delta_grid(1.0, -1.0, 5).is_err());
    assert!(delta_grid(0.0, 1.0, 0).is_err());
    assert_eq!(delta_grid(0.5, 0.5, 1).unwrap(), vec![0.5]);
}

#[test]
fn transition_moves_in_with_the_cutoff() {
    let at = |wc: f64| {
        locate_transition(
            &ReservoirParams::anisotropic(0.0, 1.0, wc).unwrap(),
            (0.0, 0.2),
        )
        .unwrap()
    };
    let (a, b) = (at(100.0), at(1000.0));
    assert!(b < a);
    assert!((a - 0.1).abs() < 1e-3);
    assert!((b - 1000f64.sqrt().recip()).abs() < 1e-3);
}

#[test]
fn transition_requires_a_valid_bracket() {
    let p = ReservoirParams::anisotropic(0.0, 1.0, 100.0).unwrap();
    assert!(matches!(
        locate_transition(&p, (0.2, 0.3)),
        Err(Error::Bracket(_))
    ));
    assert!(matches!(
        locate_transition(&p, (-0.5, 0.0)),
        Err(Error::Bracket(_))
    ));
    let iso = ReservoirParams::isotropic(0.0, 1.0).unwrap();
    assert!(matches!(
        locate_transition(&iso, (0.0, 0.2)),
        Err(Error::ModelMismatch { .. })
    ));
}

#[test]
fn default_validation_passes() {
    let report = run_validation();
    for s in &report.suites {
        assert!(
            s.passed,
            "{}: {:e} > {:e} ({})",
            s.name, s.max_deviation, s.tolerance, s.detail
        );
    }
    assert!(report.passed);
}

#[test]
fn sweep_row_field_names() {
    let row = SweepRow {
        delta: -1.0,
        steady_population: 0.25,
        zeta2_inf: 0.5,
        bound_state_present: true,
    };
    let text = to_string(|b| write_sweep_csv(b, &[row]).unwrap());
    assert_eq!(text.lines().nth(2), Some("-1.0,0.25,0.5,true"));
}

#[test]
fn isotropic_tail_stays_positive_above_the_edge() {
    let p = ReservoirParams::isotropic(0.0, 1.0).unwrap();
    let tail: Vec<f64> = [2.0, 4.0, 6.0, 8.0, 10.0]
        .iter()
        .map(|&d| sweep_point(&p, &ensemble(), d).unwrap().zeta2_inf)
        .collect();
    assert!(tail.iter().all(|&z| z > 0.0), "{tail:?}");
    assert!(tail.windows(2).all(|w| w[1] < w[0]), "{tail:?}");
}
