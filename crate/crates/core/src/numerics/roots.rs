//! Scalar root finding: sign-change scans, bisection, damped complex Newton
//! and simultaneous polynomial root iteration.

use num_complex::Complex64;

/// Consecutive scan points whose function values change sign.
pub fn sign_changes<F: FnMut(f64) -> f64>(mut f: F, points: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &x in points {
        let fx = f(x);
        if !fx.is_finite() {
            prev = None;
            continue;
        }
        if let Some((xp, fp)) = prev {
            if fp == 0.0 || fp.signum() != fx.signum() {
                out.push((xp, x));
            }
        }
        prev = Some((x, fx));
    }
    out
}

/// Bisection down to adjacent floating point numbers.
///
/// The bracket must straddle a sign change of `f`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOutcome {
    pub root: Complex64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Newton iteration for an analytic function (equivalently 2-D Newton on the
/// real and imaginary parts), halving the step until `|f|` decreases.
///
/// `f` returns the value and derivative, or `None` where it is undefined.
pub fn damped_newton<F>(f: F, seed: Complex64, tol: f64, max_iter: usize) -> Option<NewtonOutcome>
where
    F: Fn(Complex64) -> Option<(Complex64, Complex64)>,
{
    let mut z = seed;
    let (mut fz, mut dfz) = f(z)?;
    for it in 0..max_iter {
        let res = fz.norm();
        if res <= tol {
            return Some(NewtonOutcome {
                root: z,
                residual: res,
                iterations: it,
                converged: true,
            });
        }
        if dfz.norm() == 0.0 || !dfz.is_finite() {
            return None;
        }
        let step = fz / dfz;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let trial = z - step * lambda;
            if let Some((ft, dft)) = f(trial) {
                if ft.is_finite() && ft.norm() < res {
                    accepted = Some((trial, ft, dft));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((zn, fzn, dfzn)) => {
                let moved = (zn - z).norm();
                z = zn;
                fz = fzn;
                dfz = dfzn;
                if moved <= f64::EPSILON * z.norm().max(1e-300) {
                    break;
                }
            }
            None => break,
        }
    }
    let residual = fz.norm();
    Some(NewtonOutcome {
        root: z,
        residual,
        iterations: max_iter,
        converged: residual <= tol,
    })
}

/// All roots of the polynomial `sum_k coeffs[k] z^k` by Aberth–Ehrlich
/// iteration, finished with a Newton polish on each root.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.len() > 1 && c.last().is_some_and(|x| x.norm() == 0.0) {
        c.pop();
    }
    let degree = c.len().saturating_sub(1);
    if degree == 0 {
        return Vec::new();
    }
    let lead = c[degree];
    let monic: Vec<Complex64> = c.iter().map(|x| x / lead).collect();

    let eval = |z: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for k in (0..=degree).rev() {
            dp = dp * z + p;
            p = p * z + monic[k];
        }
        (p, dp)
    };

    // Cauchy bound for the initial circle.
    let radius = 1.0 + monic[..degree].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..degree)
        .map(|k| {
            Complex64::from_polar(
                radius * 0.5,
                0.4 + std::f64::consts::TAU * k as f64 / degree as f64,
            )
        })
        .collect();

    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for i in 0..degree {
            let (p, dp) = eval(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let mut repulsion = Complex64::new(0.0, 0.0);
            for j in 0..degree {
                if j != i {
                    repulsion += 1.0 / (z[i] - z[j]);
                }
            }
            let step = ratio / (1.0 - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = eval(*zi);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if step.is_finite() {
                *zi -= step;
            }
        }
    }
    z
}
