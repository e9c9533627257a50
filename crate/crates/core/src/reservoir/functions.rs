//! Pole conditions and the Laplace-domain denominator.
//!
//! With `R(s) = sqrt(-i s - delta)` the amplitude transform is `1 / D(s)`:
//!
//! ```text
//! isotropic    D(s) = s - i beta^{3/2} / R(s)
//! anisotropic  D(s) = s - i beta^{3/2} / (sqrt(omega_c) + R(s))
//! ```
//!
//! The inversion contour wraps a horizontal branch cut running from `i delta`
//! to `-inf + i delta`. Relative to the principal square root, this uncovers
//! the quadrant `Re s < 0, Im s < delta` of the second sheet, where the
//! propagating pole lives. [`sheet_sqrt`] implements that branch.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{DispersionModel, ReservoirParams};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Square root with its cut on the positive imaginary axis.
///
/// Equal to the principal root except in the closed second quadrant
/// (`Re w < 0`, `Im w >= 0`), where the sign is flipped so the function is
/// continuous across the negative real axis.
pub fn sheet_sqrt(w: Complex64) -> Complex64 {
    let r = w.sqrt();
    if w.re < 0.0 && w.im >= 0.0 {
        -r
    } else {
        r
    }
}

fn require(p: &ReservoirParams, model: DispersionModel) -> Result<()> {
    if p.model() == model {
        Ok(())
    } else {
        Err(Error::ModelMismatch {
            expected: model.name(),
            found: p.model().to_string(),
        })
    }
}

fn nonzero(w: Complex64, point: Complex64) -> Result<Complex64> {
    if w.norm() == 0.0 {
        Err(Error::SingularInput { point })
    } else {
        Ok(w)
    }
}

fn sqrt_omega_c(p: &ReservoirParams) -> f64 {
    p.omega_c().unwrap_or(0.0).sqrt()
}

/// `F(x) = x - i beta^{3/2} / sqrt(-i x - delta)`, principal branch.
pub fn eval_f(x: Complex64, p: &ReservoirParams) -> Result<Complex64> {
    require(p, DispersionModel::Isotropic)?;
    let w = nonzero(-I * x - p.delta(), x)?;
    Ok(x - I * p.coupling() / w.sqrt())
}

/// `H(y) = y + beta^{3/2} / sqrt(i y + delta)`, principal branch.
pub fn eval_h(y: Complex64, p: &ReservoirParams) -> Result<Complex64> {
    require(p, DispersionModel::Isotropic)?;
    let w = nonzero(I * y + p.delta(), y)?;
    Ok(y + p.coupling() / w.sqrt())
}

pub(crate) fn f_prime(x: Complex64, p: &ReservoirParams) -> Complex64 {
    let r = (-I * x - p.delta()).sqrt();
    1.0 + p.coupling() / (2.0 * r * r * r)
}

pub(crate) fn h_prime(y: Complex64, p: &ReservoirParams) -> Complex64 {
    let s = (I * y + p.delta()).sqrt();
    1.0 - I * p.coupling() / (2.0 * s * s * s)
}

/// The two anisotropic evaluations at one point: the left-hand side of the
/// pole condition, and the closed-form residue denominator that equals
/// `D'` at a root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnisotropicForms {
    pub root_equation: Complex64,
    pub residue_denominator: Complex64,
}

/// Localized-pole forms:
/// `x - i beta^{3/2} / (sqrt(omega_c) + sqrt(-i x - delta))` and
/// `1 - x^2 / (2 beta^{3/2} sqrt(-i x - delta))`.
pub fn eval_f_aniso(x: Complex64, p: &ReservoirParams) -> Result<AnisotropicForms> {
    require(p, DispersionModel::Anisotropic)?;
    let c = p.coupling();
    let r = nonzero(-I * x - p.delta(), x)?.sqrt();
    Ok(AnisotropicForms {
        root_equation: x - I * c / (sqrt_omega_c(p) + r),
        residue_denominator: 1.0 - x * x / (2.0 * c * r),
    })
}

/// Propagating-pole forms:
/// `y - i beta^{3/2} / (sqrt(omega_c) - i sqrt(i y + delta))` and
/// `1 - i y^2 / (2 beta^{3/2} sqrt(i y + delta))`.
pub fn eval_h_aniso(y: Complex64, p: &ReservoirParams) -> Result<AnisotropicForms> {
    require(p, DispersionModel::Anisotropic)?;
    let c = p.coupling();
    let s = nonzero(I * y + p.delta(), y)?.sqrt();
    Ok(AnisotropicForms {
        root_equation: y - I * c / (sqrt_omega_c(p) - I * s),
        residue_denominator: 1.0 - I * y * y / (2.0 * c * s),
    })
}

/// Exact derivative of the anisotropic localized root equation.
pub(crate) fn f_aniso_prime(x: Complex64, p: &ReservoirParams) -> Complex64 {
    let r = (-I * x - p.delta()).sqrt();
    let den = sqrt_omega_c(p) + r;
    1.0 + p.coupling() / (2.0 * r * den * den)
}

/// Exact derivative of the anisotropic propagating root equation.
pub(crate) fn h_aniso_prime(y: Complex64, p: &ReservoirParams) -> Complex64 {
    let s = (I * y + p.delta()).sqrt();
    let den = sqrt_omega_c(p) - I * s;
    1.0 + I * p.coupling() / (2.0 * s * den * den)
}

/// `D(s)` on the sheet exposed by the horizontal cut.
pub fn laplace_denominator(s: Complex64, p: &ReservoirParams) -> Result<Complex64> {
    let c = p.coupling();
    match p.model() {
        DispersionModel::FreeSpace => Ok(s + 0.5 * p.beta()),
        DispersionModel::Isotropic => {
            let q = sheet_sqrt(nonzero(-I * s - p.delta(), s)?);
            Ok(s - I * c / q)
        }
        DispersionModel::Anisotropic => {
            let q = sheet_sqrt(nonzero(-I * s - p.delta(), s)?);
            Ok(s - I * c / (sqrt_omega_c(p) + q))
        }
    }
}

/// `D'(s)` on the same sheet; residues are `1 / D'(pole)`.
pub fn laplace_denominator_prime(s: Complex64, p: &ReservoirParams) -> Result<Complex64> {
    let c = p.coupling();
    match p.model() {
        DispersionModel::FreeSpace => Ok(Complex64::new(1.0, 0.0)),
        DispersionModel::Isotropic => {
            let q = sheet_sqrt(nonzero(-I * s - p.delta(), s)?);
            Ok(1.0 + c / (2.0 * q * q * q))
        }
        DispersionModel::Anisotropic => {
            let q = sheet_sqrt(nonzero(-I * s - p.delta(), s)?);
            let den = sqrt_omega_c(p) + q;
            Ok(1.0 + c / (2.0 * q * den * den))
        }
    }
}
