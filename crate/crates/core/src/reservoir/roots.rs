//! Locating the localized (bound) and propagating poles.

use num_complex::Complex64;
use serde::Serialize;

use super::functions::{eval_f_aniso, eval_h_aniso, f_aniso_prime, h_aniso_prime, h_prime};
use crate::error::{Error, Result};
use crate::numerics::roots::{bisect, damped_newton, sign_changes};
use crate::params::{DispersionModel, ReservoirParams};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Number of log-spaced scan points on the imaginary axis.
pub const SCAN_POINTS: usize = 1000;
/// The scan extends to `max(delta, 0) + SCAN_SPAN * beta`.
pub const SCAN_SPAN: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub location: Complex64,
    /// `|D(location)|` at acceptance.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Absence {
    /// No sign change on the imaginary-axis scan.
    NoSignChange,
    /// Newton converged, but only outside the admissible region.
    OutsideRegion,
    /// No seed converged.
    NotConverged,
    /// The model has no pole of this kind.
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PoleSearch {
    Found(Root),
    Absent(Absence),
}

impl PoleSearch {
    pub fn root(&self) -> Option<&Root> {
        match self {
            PoleSearch::Found(r) => Some(r),
            PoleSearch::Absent(_) => None,
        }
    }

    pub fn location(&self) -> Option<Complex64> {
        self.root().map(|r| r.location)
    }

    pub fn is_found(&self) -> bool {
        self.root().is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootSet {
    pub model: DispersionModel,
    pub localized: PoleSearch,
    pub propagating: PoleSearch,
}

impl RootSet {
    pub fn bound_state(&self) -> bool {
        self.localized.is_found()
    }

    /// Largest residual among the poles that were found, 0 when none were.
    pub fn max_residual(&self) -> f64 {
        [self.localized, self.propagating]
            .iter()
            .filter_map(|p| p.root().map(|r| r.residual))
            .fold(0.0, f64::max)
    }
}

/// Admissible region for the localized pole.
pub fn in_localized_region(model: DispersionModel, x: Complex64, delta: f64) -> bool {
    match model {
        DispersionModel::Isotropic => x.re <= 0.0 && x.im > delta,
        DispersionModel::Anisotropic => x.re >= 0.0 || x.im > delta,
        DispersionModel::FreeSpace => false,
    }
}

/// Admissible region for the propagating pole, strict on both sides.
pub fn in_propagating_region(model: DispersionModel, y: Complex64, delta: f64) -> bool {
    match model {
        DispersionModel::FreeSpace => false,
        _ => y.re < 0.0 && y.im < delta,
    }
}

pub fn find_roots(p: &ReservoirParams) -> Result<RootSet> {
    let model = p.model();
    if model == DispersionModel::FreeSpace {
        return Ok(RootSet {
            model,
            localized: PoleSearch::Absent(Absence::NotApplicable),
            propagating: PoleSearch::Absent(Absence::NotApplicable),
        });
    }
    Ok(RootSet {
        model,
        localized: localized_pole(p)?,
        propagating: propagating_pole(p)?,
    })
}

/// `Im D(i u)` for `u > delta`, where `D(i u)` is purely imaginary.
fn axis_function(p: &ReservoirParams, u: f64) -> f64 {
    let r = (u - p.delta()).sqrt();
    let c = p.coupling();
    match p.model() {
        DispersionModel::Isotropic => u - c / r,
        _ => u - c / (p.omega_c().unwrap_or(0.0).sqrt() + r),
    }
}

fn scan_points(p: &ReservoirParams) -> Vec<f64> {
    let delta = p.delta();
    let span = p.delta().max(0.0) + SCAN_SPAN * p.beta() - delta;
    let first = 1e-12 * span;
    let ratio = (span / first).ln();
    (0..SCAN_POINTS)
        .map(|k| delta + first * (ratio * k as f64 / (SCAN_POINTS - 1) as f64).exp())
        .collect()
}

fn localized_pole(p: &ReservoirParams) -> Result<PoleSearch> {
    let pts = scan_points(p);
    let brackets = sign_changes(|u| axis_function(p, u), &pts);
    let Some(&(lo, hi)) = brackets.first() else {
        return Ok(PoleSearch::Absent(Absence::NoSignChange));
    };
    let u = bisect(|u| axis_function(p, u), lo, hi);
    let x = I * u;
    if !in_localized_region(p.model(), x, p.delta()) {
        return Ok(PoleSearch::Absent(Absence::OutsideRegion));
    }
    let residual = match p.model() {
        DispersionModel::Isotropic => super::functions::eval_f(x, p)?.norm(),
        _ => eval_f_aniso(x, p)?.root_equation.norm(),
    };
    // Both terms of F carry the magnitude of u, so rounding in u sets the floor.
    let tol = 1e-12 * (p.beta() + u.abs());
    if residual > tol {
        return Err(Error::Convergence(format!(
            "localized pole at {x} has residual {residual:e} above {tol:e}"
        )));
    }
    // Confirm with the complex derivative that the root is simple.
    let d = match p.model() {
        DispersionModel::Isotropic => super::functions::f_prime(x, p),
        _ => f_aniso_prime(x, p),
    };
    if d.norm() == 0.0 {
        return Err(Error::Convergence(format!(
            "localized pole at {x} is not simple"
        )));
    }
    Ok(PoleSearch::Found(Root {
        location: x,
        residual,
    }))
}

/// Value and derivative of the propagating-pole condition; `None` at the
/// branch point.
fn propagating_eval(p: &ReservoirParams, y: Complex64) -> Option<(Complex64, Complex64)> {
    let val = match p.model() {
        DispersionModel::Isotropic => super::functions::eval_h(y, p).ok()?,
        _ => eval_h_aniso(y, p).ok()?.root_equation,
    };
    let der = match p.model() {
        DispersionModel::Isotropic => h_prime(y, p),
        _ => h_aniso_prime(y, p),
    };
    (val.is_finite() && der.is_finite()).then_some((val, der))
}

/// Weak-coupling estimate: a few fixed-point sweeps `y <- y - D(y)` started
/// from the Markov rate.
fn weak_coupling_seed(p: &ReservoirParams) -> Complex64 {
    let c = p.coupling();
    let scale = p.delta().abs() + p.beta();
    let mut y = Complex64::new(-c / scale.sqrt(), p.delta() - 0.1 * p.beta());
    for _ in 0..8 {
        match propagating_eval(p, y) {
            Some((v, _)) if (y - v).is_finite() => {
                let next = y - v;
                if in_propagating_region(p.model(), next, p.delta()) {
                    y = next;
                } else {
                    break;
                }
            }
            _ => break,
        }
    }
    y
}

fn propagating_pole(p: &ReservoirParams) -> Result<PoleSearch> {
    let delta = p.delta();
    let beta = p.beta();
    let mut seeds = vec![weak_coupling_seed(p)];
    for rho in [0.003, 0.02, 0.1, 0.5, 1.0, 2.0, 5.0] {
        for phi in [1.02, 1.25, 1.48] {
            seeds.push(I * delta + Complex64::from_polar(rho * beta, phi * std::f64::consts::PI));
        }
    }
    let tol = 1e-12 * beta;
    let mut outside = false;
    let mut found: Vec<Root> = Vec::new();
    for seed in seeds {
        let Some(out) = damped_newton(|y| propagating_eval(p, y), seed, tol, 100) else {
            continue;
        };
        if !out.converged {
            continue;
        }
        if !in_propagating_region(p.model(), out.root, delta) {
            outside = true;
            continue;
        }
        if !found
            .iter()
            .any(|r| (r.location - out.root).norm() < 1e-8 * beta)
        {
            found.push(Root {
                location: out.root,
                residual: out.residual,
            });
        }
    }
    // With several admissible roots, the slowest-decaying one is reported.
    found.sort_by(|a, b| b.location.re.total_cmp(&a.location.re));
    Ok(match found.first() {
        Some(r) => PoleSearch::Found(*r),
        None if outside => PoleSearch::Absent(Absence::OutsideRegion),
        None => PoleSearch::Absent(Absence::NotConverged),
    })
}
