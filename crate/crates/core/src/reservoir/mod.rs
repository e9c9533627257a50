//! Closed-form excited-state amplitude for a single atom coupled to a
//! band-edge reservoir.
//!
//! `q(t) = sum over poles of e^{pole t} / D'(pole) + cut(t)`, where the
//! localized pole gives the trapped (non-decaying) part.

mod diffusion;
mod functions;
mod roots;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

pub use diffusion::{
    cut_integrand, denominator_polynomial, diffusion_integral, on_path_singularity,
};
pub use functions::{
    eval_f, eval_f_aniso, eval_h, eval_h_aniso, laplace_denominator, laplace_denominator_prime,
    sheet_sqrt, AnisotropicForms,
};
pub use roots::{
    find_roots, in_localized_region, in_propagating_region, Absence, PoleSearch, Root, RootSet,
    SCAN_POINTS, SCAN_SPAN,
};

use crate::error::{Error, Result};
use crate::params::{DispersionModel, ReservoirParams, TimeGrid};

/// Largest tolerated `|q(0) - 1|` before the amplitude is rejected.
pub const INITIAL_VALUE_TOL: f64 = 1e-6;
/// Populations above `1 + POPULATION_SLACK` are treated as a numerical failure.
pub const POPULATION_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PoleKind {
    Localized,
    Propagating,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleTerm {
    pub kind: PoleKind,
    pub location: Complex64,
    pub residue: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeSource {
    ClosedForm,
    Volterra,
}

/// Amplitude and population sampled on a time grid.
#[derive(Debug, Clone, Serialize)]
pub struct AmplitudeSeries {
    pub times: Vec<f64>,
    pub amplitude: Vec<Complex64>,
    pub population: Vec<f64>,
    pub source: AmplitudeSource,
}

impl AmplitudeSeries {
    pub(crate) fn from_amplitude(
        times: Vec<f64>,
        amplitude: Vec<Complex64>,
        source: AmplitudeSource,
    ) -> Self {
        let population = amplitude.iter().map(|q| q.norm_sqr()).collect();
        Self {
            times,
            amplitude,
            population,
            source,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Poles, residues and the cut integral for one parameter set.
#[derive(Debug, Clone)]
pub struct ClosedForm {
    params: ReservoirParams,
    roots: RootSet,
    poles: Vec<PoleTerm>,
}

impl ClosedForm {
    pub fn new(params: &ReservoirParams) -> Result<Self> {
        let roots = find_roots(params)?;
        let mut poles = Vec::new();
        for (kind, search) in [
            (PoleKind::Localized, roots.localized),
            (PoleKind::Propagating, roots.propagating),
        ] {
            if let Some(r) = search.root() {
                let d = laplace_denominator_prime(r.location, params)?;
                poles.push(PoleTerm {
                    kind,
                    location: r.location,
                    residue: 1.0 / d,
                });
            }
        }
        if params.model() != DispersionModel::FreeSpace {
            if let Some(z) = on_path_singularity(params) {
                return Err(Error::OnPathSingularity { z });
            }
        }
        Ok(Self {
            params: *params,
            roots,
            poles,
        })
    }

    pub fn params(&self) -> &ReservoirParams {
        &self.params
    }

    pub fn roots(&self) -> &RootSet {
        &self.roots
    }

    pub fn poles(&self) -> &[PoleTerm] {
        &self.poles
    }

    pub fn pole_part(&self, t: f64) -> Complex64 {
        self.poles
            .iter()
            .map(|p| p.residue * (p.location * t).exp())
            .sum()
    }

    /// Raw `q(t)`, with no clamping or consistency checks.
    pub fn eval(&self, t: f64) -> Result<Complex64> {
        if self.params.model() == DispersionModel::FreeSpace {
            return Ok(Complex64::new((-0.5 * self.params.beta() * t).exp(), 0.0));
        }
        Ok(self.pole_part(t) + diffusion::diffusion_integral_unchecked(&self.params, t)?)
    }

    /// Raw `q(0)`; equals 1 up to quadrature error.
    pub fn initial_value(&self) -> Result<Complex64> {
        self.eval(0.0)
    }

    /// `|residue|^2` of the localized pole, 0 without a bound state.
    pub fn steady_population(&self) -> f64 {
        self.poles
            .iter()
            .find(|p| p.kind == PoleKind::Localized)
            .map_or(0.0, |p| p.residue.norm_sqr())
    }

    /// Samples `q` on the grid.
    ///
    /// Fails if `|q(0) - 1|` exceeds [`INITIAL_VALUE_TOL`] or a population
    /// exceeds `1 + POPULATION_SLACK`; populations within the slack are
    /// clamped to 1.
    pub fn series(&self, grid: &TimeGrid) -> Result<AmplitudeSeries> {
        let times = grid.times();
        let q0 = self.initial_value()?;
        if (q0 - 1.0).norm() > INITIAL_VALUE_TOL {
            return Err(Error::Consistency(format!("q(0) = {q0} deviates from 1")));
        }
        let mut q: Vec<Complex64> = times
            .par_iter()
            .map(|&t| self.eval(t))
            .collect::<Result<_>>()?;
        for (qk, &t) in q.iter_mut().zip(&times) {
            let pop = qk.norm_sqr();
            if pop > 1.0 + POPULATION_SLACK {
                return Err(Error::Consistency(format!(
                    "population {pop} exceeds 1 at t = {t}"
                )));
            }
            if pop > 1.0 {
                *qk /= pop.sqrt();
            }
        }
        Ok(AmplitudeSeries::from_amplitude(
            times,
            q,
            AmplitudeSource::ClosedForm,
        ))
    }
}

pub fn amplitude(p: &ReservoirParams, grid: &TimeGrid) -> Result<AmplitudeSeries> {
    ClosedForm::new(p)?.series(grid)
}

/// `|1 / D'(x)|^2` at the localized pole, 0 without one.
///
/// Needs only the pole, so it stays defined where a pole sits on the cut.
pub fn steady_population(p: &ReservoirParams) -> Result<f64> {
    match find_roots(p)?.localized.location() {
        Some(x) => Ok(1.0 / laplace_denominator_prime(x, p)?.norm_sqr()),
        None => Ok(0.0),
    }
}
