//! Branch-cut (diffusion) contribution to the amplitude.
//!
//! The cut runs along `s = i delta - z`, `z > 0`, so the contribution is
//! `e^{i delta t} * int_0^inf g(z) e^{-z t} dz` with the model integrands
//!
//! ```text
//! isotropic    g(z) = (1/pi) beta^{3/2} sqrt(-i z) / (i beta^3 - z (-z + i delta)^2)
//! anisotropic  g(z) = (1/pi) beta^{3/2} sqrt(i z) (omega_c - i z)
//!                     / (i beta^3 z - [(delta + i z)(omega_c - i z) - sqrt(omega_c) beta^{3/2}]^2)
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::quadrature::{integrate, QuadConfig, QuadFailure};
use crate::numerics::roots::polynomial_roots;
use crate::params::{DispersionModel, ReservoirParams};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Break point of the `w = sqrt(z T)` substitution; beyond it `w = W0 / x`.
const W0: f64 = 6.0;

/// Cut integrand `g(z)` including the `1/pi` prefactor.
pub fn cut_integrand(p: &ReservoirParams, z: f64) -> Complex64 {
    let c = p.coupling();
    let b3 = c * c;
    let delta = p.delta();
    let z = Complex64::new(z, 0.0);
    match p.model() {
        DispersionModel::Isotropic => {
            let d = -z + I * delta;
            c * (-I * z).sqrt() / (I * b3 - z * d * d) / PI
        }
        DispersionModel::Anisotropic => {
            let wc = p.omega_c().unwrap_or(0.0);
            let inner = (delta + I * z) * (wc - I * z) - wc.sqrt() * c;
            c * (I * z).sqrt() * (wc - I * z) / (I * b3 * z - inner * inner) / PI
        }
        DispersionModel::FreeSpace => Complex64::new(0.0, 0.0),
    }
}

/// Coefficients (low to high) of the integrand denominator as a polynomial in `z`.
pub fn denominator_polynomial(p: &ReservoirParams) -> Vec<Complex64> {
    let c = p.coupling();
    let b3 = c * c;
    let delta = p.delta();
    let re = |x: f64| Complex64::new(x, 0.0);
    match p.model() {
        DispersionModel::Isotropic => vec![I * b3, re(delta * delta), 2.0 * I * delta, re(-1.0)],
        DispersionModel::Anisotropic => {
            let wc = p.omega_c().unwrap_or(0.0);
            let a = I * (wc - delta);
            let b = re(delta * wc - wc.sqrt() * c);
            vec![
                -b * b,
                I * b3 - 2.0 * a * b,
                -(a * a + 2.0 * b),
                -2.0 * a,
                re(-1.0),
            ]
        }
        DispersionModel::FreeSpace => Vec::new(),
    }
}

/// Positive real zero of the denominator, if any, i.e. a pole sitting on the cut.
pub fn on_path_singularity(p: &ReservoirParams) -> Option<Complex64> {
    polynomial_roots(&denominator_polynomial(p))
        .into_iter()
        .find(|z| z.re > 0.0 && z.im.abs() <= 1e-9 * (1.0 + z.norm()))
}

/// `e^{i delta t} int_0^inf g(z) e^{-z t} dz`.
pub fn diffusion_integral(p: &ReservoirParams, t: f64) -> Result<Complex64> {
    if p.model() == DispersionModel::FreeSpace {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if let Some(z) = on_path_singularity(p) {
        return Err(Error::OnPathSingularity { z });
    }
    diffusion_integral_unchecked(p, t)
}

pub(crate) fn diffusion_integral_unchecked(p: &ReservoirParams, t: f64) -> Result<Complex64> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::invalid(
            "t",
            t,
            "time must be finite and non-negative",
        ));
    }
    // z = w^2 / T removes the z^{1/2} endpoint behaviour and scales the
    // exponential to unit width.
    let scale = t.max(1e-3 / p.beta());
    let f = |w: f64| {
        let z = w * w / scale;
        cut_integrand(p, z) * ((-z * t).exp() * 2.0 * w / scale)
    };
    let cfg = QuadConfig {
        rel_tol: 1e-11,
        abs_tol: 1e-15,
        max_intervals: 8000,
    };
    let fail = |e: QuadFailure<Complex64>| Error::Quadrature {
        estimate: e.partial.value,
        error: e.partial.error,
        intervals: e.partial.intervals,
    };
    let head = integrate(f, 0.0, W0, &cfg).map_err(fail)?;
    let tail = integrate(
        |x: f64| {
            if x == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                f(W0 / x) * (W0 / (x * x))
            }
        },
        0.0,
        1.0,
        &cfg,
    )
    .map_err(fail)?;
    Ok(Complex64::from_polar(1.0, p.delta() * t) * (head.value + tail.value))
}
