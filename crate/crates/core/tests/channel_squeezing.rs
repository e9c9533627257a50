use nalgebra::DMatrix;
use num_complex::Complex64;
use pcc_squeeze::channel::{apply, apply_product, kraus, DensityMatrix};
use pcc_squeeze::squeezing::{
    brute_force_moments, brute_force_state, brute_force_xi, evolved_moments, initial_moments,
    spin_statistics, twisted_state_moments, xi_squared, Moments,
};
use pcc_squeeze::{EnsembleParams, Error};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `A A^dag / tr` from a flat list of real and imaginary parts.
fn density_from(parts: &[f64], dim: usize) -> DensityMatrix {
    let a = DMatrix::from_fn(dim, dim, |i, j| {
        let k = 2 * (i * dim + j);
        c(parts[k], parts[k + 1])
    });
    let mut rho = &a * a.adjoint();
    let tr = rho.trace();
    rho /= tr;
    // Restore exact Hermiticity after the division.
    let rho = (&rho + rho.adjoint()) * c(0.5, 0.0);
    DensityMatrix::new(rho).unwrap()
}

fn random_state(m: usize) -> impl Strategy<Value = DensityMatrix> {
    let dim = 1 << m;
    prop::collection::vec(-1.0..1.0f64, 2 * dim * dim)
        .prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
        .prop_map(move |v| density_from(&v, dim))
}

/// Kraus operators as full matrices, sum over both terms on one qubit.
fn reference_single(rho: &DMatrix<Complex64>, p: f64) -> DMatrix<Complex64> {
    let e1 = DMatrix::from_row_slice(
        2,
        2,
        &[c(p.sqrt(), 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
    );
    let e2 = DMatrix::from_row_slice(
        2,
        2,
        &[
            c(0.0, 0.0),
            c(0.0, 0.0),
            c((1.0 - p).sqrt(), 0.0),
            c(0.0, 0.0),
        ],
    );
    &e1 * rho * e1.adjoint() + &e2 * rho * e2.adjoint()
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn kraus_completeness_on_a_dense_grid() {
    for k in 0..=1000 {
        let p = k as f64 / 1000.0;
        assert!(kraus(p).unwrap().completeness_defect() <= 1e-14, "p = {p}");
    }
    assert!(matches!(kraus(1.5), Err(Error::Domain { .. })));
    assert!(matches!(kraus(-0.1), Err(Error::Domain { .. })));
}

#[test]
fn single_qubit_matches_explicit_matrices() {
    let rho = DMatrix::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.4, 0.0)]);
    let d = DensityMatrix::new(rho.clone()).unwrap();
    let out = apply(&d, &kraus(0.37).unwrap()).unwrap();
    assert!(max_abs(&(out.matrix() - reference_single(&rho, 0.37))) <= 1e-15);
    // Excited population (index 0) decays into the ground state.
    assert!((out.matrix()[(0, 0)].re - 0.6 * 0.37).abs() <= 1e-15);
}

#[test]
fn reduction_commutes_with_the_channel() {
    let e = EnsembleParams::new(6, 0.3).unwrap();
    let rho = DensityMatrix::from_pure(&brute_force_state(&e).unwrap()).unwrap();
    let k = kraus(0.55).unwrap();
    let full = apply_product(&rho, &k, 6)
        .unwrap()
        .reduce_to_pair(1, 4)
        .unwrap();
    let pair = apply_product(&rho.reduce_to_pair(1, 4).unwrap(), &k, 2).unwrap();
    assert!(max_abs(&(full.matrix() - pair.matrix())) <= 1e-10);
}

#[test]
fn brute_force_moments_match_closed_form() {
    for n in [2, 3, 5, 8, 10] {
        for theta in [0.05, 0.3, 1.0, 2.5] {
            let e = EnsembleParams::new(n, theta).unwrap();
            let a = brute_force_moments(&e).unwrap();
            let b = initial_moments(&e);
            assert!((a.sz - b.sz).abs() <= 1e-12, "n={n} theta={theta}");
            assert!((a.spm - b.spm).abs() <= 1e-12);
            assert!((a.smm - b.smm).norm() <= 1e-12);
        }
    }
}

#[test]
fn two_atoms_have_no_twisting_correlation() {
    let m = twisted_state_moments(2, 0.7);
    assert_eq!(m.spm, 0.0);
    assert!((m.sz + (0.35f64).cos()).abs() < 1e-15);
}

#[test]
fn closed_form_xi_matches_full_state() {
    let e = EnsembleParams::new(8, 0.15 * std::f64::consts::PI).unwrap();
    for p in [1.0, 0.8, 0.5, 0.2] {
        let closed = xi_squared(&evolved_moments(&initial_moments(&e), p).unwrap(), 8).unwrap();
        let brute = brute_force_xi(&e, p).unwrap();
        assert!(
            (closed.xi2 - brute.xi2).abs() <= 1e-8,
            "p={p}: {} vs {}",
            closed.xi2,
            brute.xi2
        );
    }
}

#[test]
fn ground_state_is_unsqueezed() {
    let v = xi_squared(&Moments::GROUND, 10).unwrap();
    assert_eq!(v.xi2, 1.0);
    assert_eq!(v.zeta2, 0.0);
    let dead = evolved_moments(
        &initial_moments(&EnsembleParams::new(10, 0.4).unwrap()),
        0.0,
    )
    .unwrap();
    assert_eq!(dead.sz, -1.0);
}

#[test]
fn vanishing_mean_spin_is_an_error() {
    let m = Moments {
        sz: 0.0,
        spm: 0.1,
        smm: c(0.0, 0.0),
    };
    assert!(matches!(xi_squared(&m, 4), Err(Error::SingularMeanSpin)));
    assert!(xi_squared(&Moments::GROUND, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn channel_preserves_trace_and_positivity(
        (m, rho) in (1usize..=3).prop_flat_map(|m| (Just(m), random_state(m))),
        p in 0.0..=1.0f64,
    ) {
        let out = apply_product(&rho, &kraus(p).unwrap(), m).unwrap();
        prop_assert!((out.trace() - 1.0).norm() <= 1e-12);
        prop_assert!(out.min_eigenvalue() >= -1e-10);
        prop_assert!(max_abs(&(out.matrix() - out.matrix().adjoint())) <= 1e-12);
    }

    #[test]
    fn channels_compose_multiplicatively(rho in random_state(1), p1 in 0.0..=1.0f64, p2 in 0.0..=1.0f64) {
        let two = apply(&apply(&rho, &kraus(p1).unwrap()).unwrap(), &kraus(p2).unwrap()).unwrap();
        let one = apply(&rho, &kraus(p1 * p2).unwrap()).unwrap();
        prop_assert!(max_abs(&(two.matrix() - one.matrix())) <= 1e-12);
    }

    #[test]
    fn uncertainty_relation_holds(n in 3usize..=7, theta in 0.01..3.1f64, p in 0.0..=1.0f64) {
        let e = EnsembleParams::new(n, theta).unwrap();
        let rho = DensityMatrix::from_pure(&brute_force_state(&e).unwrap()).unwrap();
        let rho = apply_product(&rho, &kraus(p).unwrap(), n).unwrap();
        let s = spin_statistics(&rho).unwrap();
        prop_assert!(s.variance(0) * s.variance(1) >= s.mean[2] * s.mean[2] / 4.0 - 1e-10);
    }

    #[test]
    fn squeezing_is_bounded_and_continuous(n in 2usize..=200, theta in 0.01..3.1f64, p in 0.0..0.999f64) {
        let e = EnsembleParams::new(n, theta).unwrap();
        let m0 = initial_moments(&e);
        let a = xi_squared(&evolved_moments(&m0, p).unwrap(), n).unwrap();
        let b = xi_squared(&evolved_moments(&m0, p + 1e-6).unwrap(), n).unwrap();
        prop_assert!((0.0..=1.0).contains(&a.zeta2));
        prop_assert!(a.xi2 >= 0.0);
        prop_assert!((a.zeta2 - b.zeta2).abs() <= 1e-3);
    }
}
