use std::f64::consts::PI;

use pcc_squeeze::params::{parse_config, ConfigEntries};
use pcc_squeeze::{DispersionModel, Error, ErrorKind, ReservoirParams};
use proptest::prelude::*;

#[test]
fn figure_defaults_apply() {
    let cfg = parse_config("model=isotropic, delta=-10, beta=1").unwrap();
    assert_eq!(cfg.reservoir.model(), DispersionModel::Isotropic);
    assert_eq!(cfg.reservoir.delta(), -10.0);
    assert_eq!(cfg.ensemble.n_atoms(), 10);
    assert!((cfg.ensemble.theta() - 0.15 * PI).abs() < 1e-15);
}

#[test]
fn anisotropic_needs_a_cutoff() {
    let cfg = parse_config("model=anisotropic, delta=0.1, omega_c=100").unwrap();
    assert_eq!(cfg.reservoir.omega_c(), Some(100.0));
    assert!(matches!(
        parse_config("model=anisotropic, delta=0.1"),
        Err(Error::MissingKey { .. })
    ));
}

#[test]
fn pi_suffix_and_comments() {
    let cfg = parse_config("# run\nmodel = iso\ntheta = 0.3pi  # twisting\nn_atoms = 4\n").unwrap();
    assert!((cfg.ensemble.theta() - 0.3 * PI).abs() < 1e-15);
    assert_eq!(cfg.ensemble.n_atoms(), 4);
}

#[test]
fn bad_documents_are_parameter_errors() {
    for text in [
        "model=iso, colour=red",
        "model=iso, delta",
        "model=crystal",
        "model=iso, beta=0",
        "model=iso, beta=-1",
        "model=iso, n_atoms=1",
        "model=iso, theta=4",
        "model=iso, delta=abc",
        "model=iso, n_steps=0",
        "delta=1",
    ] {
        let err = parse_config(text).unwrap_err();
        assert_eq!(err.kind(), ErrorKind::Parameter, "{text}: {err}");
    }
}

#[test]
fn later_entries_override_earlier_ones() {
    let mut base = ConfigEntries::parse("model=iso, delta=1").unwrap();
    let over = ConfigEntries::parse("delta=-2").unwrap();
    base.merge(&over);
    base.set("beta", "2").unwrap();
    let cfg = base.build().unwrap();
    assert_eq!(cfg.reservoir.delta(), -2.0);
    assert_eq!(cfg.reservoir.beta(), 2.0);
    assert!(base.set("nope", 1).is_err());
}

#[test]
fn with_delta_keeps_the_rest() {
    let p = ReservoirParams::anisotropic(0.0, 1.5, 30.0).unwrap();
    let q = p.with_delta(-0.7).unwrap();
    assert_eq!(
        (q.model(), q.beta(), q.omega_c(), q.delta()),
        (p.model(), 1.5, Some(30.0), -0.7)
    );
}

proptest! {
    #[test]
    fn rendered_config_parses_back(
        model in prop_oneof![Just("isotropic"), Just("anisotropic"), Just("freespace")],
        delta in -20.0..20.0f64,
        beta in 0.1..5.0f64,
        omega_c in 20.0..1000.0f64,
        n in 2usize..500,
        theta in 0.01..3.1f64,
        t_max in 0.1..100.0f64,
        steps in 1usize..5000,
    ) {
        let text = format!(
            "model={model}\ndelta={delta:?}\nbeta={beta:?}\nomega_c={omega_c:?}\nn_atoms={n}\ntheta={theta:?}\nt_max={t_max:?}\nn_steps={steps}"
        );
        let cfg = parse_config(&text).unwrap();
        prop_assert_eq!(parse_config(&cfg.to_config_string()).unwrap(), cfg);
    }
}
