use num_complex::Complex64;
use pcc_squeeze::reservoir::{amplitude, steady_population};
use pcc_squeeze::volterra::{
    kernel_for, solve, solve_with, transform_check_points, VolterraOptions,
};
use pcc_squeeze::{ReservoirParams, TimeGrid};

fn sup_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[test]
fn kernel_transforms_match_numerically() {
    for p in [
        ReservoirParams::isotropic(0.0, 1.0).unwrap(),
        ReservoirParams::isotropic(-3.0, 1.5).unwrap(),
        ReservoirParams::anisotropic(0.0, 1.0, 100.0).unwrap(),
        ReservoirParams::anisotropic(-0.5, 0.8, 30.0).unwrap(),
    ] {
        let k = kernel_for(&p);
        let m = k
            .transform_mismatch(&transform_check_points(p.beta()))
            .unwrap();
        assert!(m <= 1e-6, "{p:?}: {m:e}");
    }
}

#[test]
fn step_halving_converges() {
    let p = ReservoirParams::isotropic(1.0, 1.0).unwrap();
    let run = solve_with(
        &kernel_for(&p),
        &TimeGrid::uniform(5.0, 50).unwrap(),
        &VolterraOptions::default(),
    )
    .unwrap();
    assert!(run.converged);
    assert!(run.halving_change <= 1e-4);
    assert!(run.step <= 0.02);
}

#[test]
fn agrees_with_closed_form() {
    for p in [
        ReservoirParams::isotropic(-2.0, 1.0).unwrap(),
        ReservoirParams::isotropic(2.0, 1.0).unwrap(),
        ReservoirParams::anisotropic(-0.5, 1.0, 100.0).unwrap(),
        ReservoirParams::anisotropic(0.5, 1.0, 100.0).unwrap(),
    ] {
        let grid = TimeGrid::uniform(10.0, 40).unwrap();
        let a = solve(&p, &grid).unwrap();
        let b = amplitude(&p, &grid).unwrap();
        let d = sup_diff(&a.amplitude, &b.amplitude);
        assert!(d <= 1e-3, "{p:?}: {d:e}");
    }
}

#[test]
fn free_space_is_exponential() {
    let p = ReservoirParams::free_space(1.0).unwrap();
    let grid = TimeGrid::uniform(10.0, 100).unwrap();
    let s = solve(&p, &grid).unwrap();
    for (t, pop) in s.times.iter().zip(&s.population) {
        assert!((pop - (-t).exp()).abs() <= 1e-8);
    }
}

#[test]
fn deep_gap_plateau() {
    let p = ReservoirParams::isotropic(-10.0, 1.0).unwrap();
    let s = solve(&p, &TimeGrid::uniform(50.0, 100).unwrap()).unwrap();
    let end = *s.population.last().unwrap();
    assert!(
        (end - steady_population(&p).unwrap()).abs() <= 1e-3,
        "{end}"
    );
}

#[test]
fn kernel_phase_fault_is_detected() {
    let p = ReservoirParams::isotropic(0.0, 1.0).unwrap();
    let bad = kernel_for(&p).with_phase_error(0.3);
    assert!(
        bad.transform_mismatch(&transform_check_points(1.0))
            .unwrap()
            > 1e-3
    );

    let grid = TimeGrid::uniform(5.0, 20).unwrap();
    let reference = amplitude(&p, &grid).unwrap();
    // Either the run is rejected outright or it lands far from the closed form.
    if let Ok(run) = solve_with(&bad, &grid, &VolterraOptions::default()) {
        assert!(sup_diff(&run.series.amplitude, &reference.amplitude) > 1e-3);
    }
}
