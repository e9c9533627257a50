//! Direct time-domain solution of `q'(t) + int_0^t G(t - tau) q(tau) dtau = 0`.
//!
//! Used as a reference that shares nothing with the pole/cut machinery
//! beyond the Laplace-domain kernel `G~(s) = D(s) - s`.
//!
//! # Scheme
//!
//! The equation is integrated once and solved in a frame rotating at the
//! Markov-shifted frequency `Omega = -Im G~(beta)`, where `r = q e^{-i Omega t}`
//! obeys
//!
//! ```text
//! r(t) = 1 - int_0^t k(t - tau) r(tau) dtau,   k(s) = i Omega + int_0^s g,
//! g(s) = G(s) e^{-i Omega s}.
//! ```
//!
//! `r` is taken piecewise linear on the grid and the kernel moments on each
//! cell are integrated adaptively (product trapezoid). On the first cell the
//! substitution `s = h eta^2` removes the `s^{-1/2}` singularity of `g`.
//! Each run is repeated at half the step; the step-halving change is the
//! convergence measure and the Richardson combination `(4 q_{h/2} - q_h) / 3`
//! is returned.

use std::f64::consts::{FRAC_PI_4, PI};
use std::ops::{Add, Mul, Sub};

use errorfunctions::ComplexErrorFunctions;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::quadrature::{integrate, QuadConfig, QuadValue};
use crate::params::{DispersionModel, ReservoirParams, TimeGrid};
use crate::reservoir::{AmplitudeSeries, AmplitudeSource};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Memory kernel in both representations.
#[derive(Debug, Clone, Copy)]
pub struct KernelSpec {
    params: ReservoirParams,
    phase_error: f64,
}

/// Kernel for the given reservoir.
///
/// * isotropic: `G(t) = beta^{3/2} e^{-i pi/4} e^{i delta t} / sqrt(pi t)`
/// * anisotropic: `G(t) = beta^{3/2} e^{-i pi/4} e^{i delta t}
///   [1/sqrt(pi t) - a erfcx(a sqrt(t))]`, `a = sqrt(omega_c) e^{i pi/4}`
/// * free space: `G(t) = beta_0 delta(t)` with half weight at the endpoint.
pub fn kernel_for(p: &ReservoirParams) -> KernelSpec {
    KernelSpec {
        params: *p,
        phase_error: 0.0,
    }
}

impl KernelSpec {
    pub fn model(&self) -> DispersionModel {
        self.params.model()
    }

    /// Exponent of the `t^{-alpha}` singularity at the origin (0 for the
    /// Dirac kernel, which is handled separately).
    pub fn singular_exponent(&self) -> f64 {
        match self.model() {
            DispersionModel::FreeSpace => 0.0,
            _ => 0.5,
        }
    }

    /// Copy of the kernel whose time-domain form carries an extra constant
    /// phase. Used to check that the validation suite detects kernel errors.
    pub fn with_phase_error(&self, phase: f64) -> Self {
        Self {
            phase_error: phase,
            ..*self
        }
    }

    pub fn laplace_transform(&self, s: Complex64) -> Complex64 {
        let p = &self.params;
        match p.model() {
            DispersionModel::FreeSpace => Complex64::new(0.5 * p.beta(), 0.0),
            DispersionModel::Isotropic => -I * p.coupling() / (-I * s - p.delta()).sqrt(),
            DispersionModel::Anisotropic => {
                let wc = p.omega_c().unwrap_or(0.0);
                -I * p.coupling() / (wc.sqrt() + (-I * s - p.delta()).sqrt())
            }
        }
    }

    /// Regular part of the time kernel; zero for the Dirac kernel.
    pub fn time_kernel(&self, t: f64) -> Complex64 {
        let p = &self.params;
        let phase =
            Complex64::from_polar(p.coupling(), p.delta() * t - FRAC_PI_4 + self.phase_error);
        match p.model() {
            DispersionModel::FreeSpace => Complex64::new(0.0, 0.0),
            DispersionModel::Isotropic => phase / (PI * t).sqrt(),
            DispersionModel::Anisotropic => {
                let a = Complex64::from_polar(p.omega_c().unwrap_or(0.0).sqrt(), FRAC_PI_4);
                phase * (1.0 / (PI * t).sqrt() - a * (a * t.sqrt()).erfcx())
            }
        }
    }

    /// Weight of the `delta(t)` component.
    pub fn dirac_weight(&self) -> f64 {
        match self.model() {
            DispersionModel::FreeSpace => self.params.beta(),
            _ => 0.0,
        }
    }

    /// `int_0^inf G(t) e^{-s t} dt` by quadrature, for `Re s > 0`.
    pub fn numeric_transform(&self, s: Complex64) -> Result<Complex64> {
        if self.model() == DispersionModel::FreeSpace {
            return Ok(Complex64::new(0.5 * self.dirac_weight(), 0.0));
        }
        // t = u^2 absorbs the t^{-1/2} endpoint; u = U0 / x maps the tail.
        const U0: f64 = 4.0;
        let f = |u: f64| {
            if u == 0.0 {
                // limit of 2 u G(u^2) as u -> 0
                let p = &self.params;
                return Complex64::from_polar(
                    2.0 * p.coupling() / PI.sqrt(),
                    -FRAC_PI_4 + self.phase_error,
                );
            }
            let t = u * u;
            self.time_kernel(t) * (-s * t).exp() * (2.0 * u)
        };
        let cfg = QuadConfig {
            rel_tol: 1e-11,
            abs_tol: 1e-14,
            max_intervals: 8000,
        };
        let fail = |e: crate::numerics::quadrature::QuadFailure<Complex64>| Error::Quadrature {
            estimate: e.partial.value,
            error: e.partial.error,
            intervals: e.partial.intervals,
        };
        let head = integrate(f, 0.0, U0, &cfg).map_err(fail)?;
        let tail = integrate(
            |x: f64| {
                if x == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    f(U0 / x) * (U0 / (x * x))
                }
            },
            0.0,
            1.0,
            &cfg,
        )
        .map_err(fail)?;
        Ok(head.value + tail.value)
    }

    /// Largest `|numeric_transform(s) - laplace_transform(s)|` over `points`.
    pub fn transform_mismatch(&self, points: &[Complex64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &s in points {
            let d = (self.numeric_transform(s)? - self.laplace_transform(s)).norm();
            worst = worst.max(d);
        }
        Ok(worst)
    }
}

/// Ten sample points in the right half-plane, scaled by `beta`.
pub fn transform_check_points(beta: f64) -> Vec<Complex64> {
    [
        (1.0, 1.0),
        (0.5, 0.0),
        (2.0, -1.0),
        (0.3, 3.0),
        (1.0, -4.0),
        (4.0, 0.5),
        (0.2, -0.7),
        (3.0, 6.0),
        (0.7, -2.5),
        (8.0, 0.0),
    ]
    .iter()
    .map(|&(re, im)| Complex64::new(re * beta, im * beta))
    .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct VolterraOptions {
    /// Required sup-norm change under step halving.
    pub tolerance: f64,
    /// Upper bound for the initial internal step, in units of `1 / beta`.
    pub max_step: f64,
    /// Largest number of internal steps for the finer of the two runs.
    pub max_internal_steps: usize,
}

impl Default for VolterraOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-4,
            max_step: 0.02,
            max_internal_steps: 1 << 16,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VolterraRun {
    pub series: AmplitudeSeries,
    pub converged: bool,
    /// Internal step of the finer run.
    pub step: f64,
    /// Sup-norm of `q_h - q_{h/2}` on the output grid.
    pub halving_change: f64,
}

/// Upper bound on populations from the oracle before a sign error is assumed.
pub const POPULATION_BOUND: f64 = 1.0 + 1e-6;

/// Solve with default options; fails when the step-halving check does not pass.
pub fn solve(p: &ReservoirParams, grid: &TimeGrid) -> Result<AmplitudeSeries> {
    let run = solve_with(&kernel_for(p), grid, &VolterraOptions::default())?;
    if !run.converged {
        return Err(Error::Convergence(format!(
            "step halving changed q by {:e} at h = {:e}",
            run.halving_change, run.step
        )));
    }
    Ok(run.series)
}

pub fn solve_with(
    kernel: &KernelSpec,
    grid: &TimeGrid,
    opts: &VolterraOptions,
) -> Result<VolterraRun> {
    let times = grid.times();
    let beta = kernel.params.beta();
    if kernel.model() == DispersionModel::FreeSpace {
        // q' = -(beta_0 / 2) q, propagated exactly step by step.
        let factor = (-0.5 * kernel.dirac_weight() * grid.step()).exp();
        let mut q = Vec::with_capacity(times.len());
        let mut cur = 1.0;
        for _ in 0..times.len() {
            q.push(Complex64::new(cur, 0.0));
            cur *= factor;
        }
        let series = AmplitudeSeries::from_amplitude(times, q, AmplitudeSource::Volterra);
        return Ok(VolterraRun {
            series,
            converged: true,
            step: grid.step(),
            halving_change: 0.0,
        });
    }

    let n_out = grid.n_steps();
    let mut sub = 1usize;
    while grid.step() / sub as f64 > opts.max_step / beta {
        sub *= 2;
    }
    let mut last = None;
    loop {
        let n = n_out * sub;
        if 2 * n > opts.max_internal_steps {
            break;
        }
        let coarse = rotated_solution(kernel, grid.t_max(), n)?;
        let fine = rotated_solution(kernel, grid.t_max(), 2 * n)?;
        let mut change: f64 = 0.0;
        let mut q = Vec::with_capacity(n_out + 1);
        for k in 0..=n_out {
            let a = coarse[k * sub];
            let b = fine[2 * k * sub];
            change = change.max((a - b).norm());
            q.push((4.0 * b - a) / 3.0);
        }
        let step = grid.t_max() / (2 * n) as f64;
        last = Some((q, change, step));
        if change <= opts.tolerance {
            break;
        }
        sub *= 2;
    }
    let Some((q, change, step)) = last else {
        return Err(Error::Convergence(format!(
            "grid of {n_out} steps needs more than {} internal steps",
            opts.max_internal_steps
        )));
    };
    for (qk, &t) in q.iter().zip(&times) {
        let pop = qk.norm_sqr();
        if !pop.is_finite() || pop > POPULATION_BOUND {
            return Err(Error::Consistency(format!(
                "oracle population {pop} at t = {t}"
            )));
        }
    }
    let series = AmplitudeSeries::from_amplitude(times, q, AmplitudeSource::Volterra);
    Ok(VolterraRun {
        series,
        converged: change <= opts.tolerance,
        step,
        halving_change: change,
    })
}

/// Three kernel moments accumulated together over one cell.
#[derive(Debug, Clone, Copy)]
struct Cell([Complex64; 3]);

impl Add for Cell {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Cell([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Cell {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Cell([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Mul<f64> for Cell {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Cell([self.0[0] * k, self.0[1] * k, self.0[2] * k])
    }
}

impl QuadValue for Cell {
    fn zero() -> Self {
        Cell([Complex64::new(0.0, 0.0); 3])
    }
    fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
    fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.is_finite())
    }
}

/// Solution `q` on `n + 1` uniform points of `[0, t_max]`.
fn rotated_solution(kernel: &KernelSpec, t_max: f64, n: usize) -> Result<Vec<Complex64>> {
    let beta = kernel.params.beta();
    let omega = -kernel.laplace_transform(Complex64::new(beta, 0.0)).im;
    let h = t_max / n as f64;
    let g = |s: f64| kernel.time_kernel(s) * Complex64::from_polar(1.0, -omega * s);
    let cfg = QuadConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-16,
        max_intervals: 200,
    };

    let mut a = vec![Complex64::new(0.0, 0.0); n];
    let mut b = vec![Complex64::new(0.0, 0.0); n];
    let mut k1 = Complex64::new(0.0, 0.0);
    let half_drift = I * omega * h / 2.0;
    for c in 0..n {
        // Moments in the local coordinate xi in [0, 1]:
        // m0 = int g, ma = int g (1 - xi)^2, mb = int g xi^2, all times h.
        let integrand = |xi: f64, jac: f64| {
            let v = g((c as f64 + xi) * h) * (jac * h);
            Cell([v, v * ((1.0 - xi) * (1.0 - xi)), v * (xi * xi)])
        };
        let res = if c == 0 {
            integrate(
                |eta: f64| {
                    if eta == 0.0 {
                        Cell::zero()
                    } else {
                        integrand(eta * eta, 2.0 * eta)
                    }
                },
                0.0,
                1.0,
                &cfg,
            )
        } else {
            integrate(|xi: f64| integrand(xi, 1.0), 0.0, 1.0, &cfg)
        };
        let m = match res {
            Ok(r) => r.value,
            Err(e) => {
                return Err(Error::Quadrature {
                    estimate: e.partial.value.0[0],
                    error: e.partial.error,
                    intervals: e.partial.intervals,
                })
            }
        };
        let [m0, ma, mb] = m.0;
        a[c] = k1 * (h / 2.0) + ma * (h / 2.0) + half_drift;
        b[c] = k1 * (h / 2.0) + (m0 - mb) * (h / 2.0) + half_drift;
        k1 += m0;
    }

    let mut r = vec![Complex64::new(0.0, 0.0); n + 1];
    r[0] = Complex64::new(1.0, 0.0);
    let denom = 1.0 + a[0];
    for step in 1..=n {
        let mut acc = b[step - 1] * r[0];
        for j in 1..step {
            acc += (a[step - j] + b[step - j - 1]) * r[j];
        }
        r[step] = (1.0 - acc) / denom;
    }
    Ok(r.into_iter()
        .enumerate()
        .map(|(k, rk)| rk * Complex64::from_polar(1.0, omega * k as f64 * h))
        .collect())
}
