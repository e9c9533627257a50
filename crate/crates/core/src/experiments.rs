//! Time series, detuning sweeps, transition search and the validation run,
//! plus the CSV files they produce.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::kraus;
use crate::error::{Error, Result};
use crate::params::{DispersionModel, EnsembleParams, ReservoirParams, TimeGrid};
use crate::reservoir::{self, find_roots, ClosedForm};
use crate::squeezing::{
    self, evolved_moments, initial_moments, xi_squared, Moments, SqueezingValue,
};
use crate::volterra::{self, kernel_for, transform_check_points, VolterraOptions};

pub const TIMESERIES_SCHEMA: &str = "# schema: pcc-squeeze/timeseries v1";
pub const SWEEP_SCHEMA: &str = "# schema: pcc-squeeze/sweep v1";

/// Default sample count for detuning sweeps.
pub const DEFAULT_SWEEP_POINTS: usize = 400;
/// Width to which [`locate_transition`] narrows its bracket, in units of beta.
pub const TRANSITION_WIDTH: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesRow {
    pub t: f64,
    pub population: f64,
    /// `None` where the mean spin vanishes.
    pub xi2: Option<f64>,
    pub zeta2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub delta: f64,
    pub steady_population: f64,
    pub zeta2_inf: f64,
    #[serde(rename = "bound_state")]
    pub bound_state_present: bool,
}

/// Squeezing after decay to survival `p`; `None` at a vanishing mean spin.
fn squeezing_at(m0: &Moments, n_atoms: usize, p: f64) -> Result<Option<SqueezingValue>> {
    match xi_squared(&evolved_moments(m0, p.clamp(0.0, 1.0))?, n_atoms) {
        Ok(v) => Ok(Some(v)),
        Err(Error::SingularMeanSpin) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn run_timeseries(
    r: &ReservoirParams,
    e: &EnsembleParams,
    g: &TimeGrid,
) -> Result<Vec<TimeSeriesRow>> {
    let series = reservoir::amplitude(r, g)?;
    let m0 = initial_moments(e);
    series
        .times
        .iter()
        .zip(&series.population)
        .map(|(&t, &population)| {
            let s = squeezing_at(&m0, e.n_atoms(), population)?;
            Ok(TimeSeriesRow {
                t,
                population,
                xi2: s.map(|v| v.xi2),
                zeta2: s.map(|v| v.zeta2),
            })
        })
        .collect()
}

/// Evenly spaced detunings including both endpoints.
pub fn delta_grid(lo: f64, hi: f64, n_points: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(Error::invalid(
            "delta_range",
            format!("[{lo}, {hi}]"),
            "need finite lo <= hi",
        ));
    }
    match n_points {
        0 => Err(Error::invalid("points", 0, "at least one point")),
        1 => Ok(vec![lo]),
        n => Ok((0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect()),
    }
}

pub fn sweep_point(template: &ReservoirParams, e: &EnsembleParams, delta: f64) -> Result<SweepRow> {
    let p = template.with_delta(delta)?;
    let bound = find_roots(&p)?.bound_state();
    let steady = reservoir::steady_population(&p)?;
    let zeta2_inf = squeezing_at(&initial_moments(e), e.n_atoms(), steady)?
        .ok_or(Error::SingularMeanSpin)?
        .zeta2;
    Ok(SweepRow {
        delta,
        steady_population: steady,
        zeta2_inf,
        bound_state_present: bound,
    })
}

/// Asymptotic squeezing over a detuning grid; rows come back in grid order.
pub fn run_sweep(
    template: &ReservoirParams,
    delta_range: (f64, f64),
    n_points: usize,
    e: &EnsembleParams,
) -> Result<Vec<SweepRow>> {
    let deltas = delta_grid(delta_range.0, delta_range.1, n_points)?;
    deltas
        .par_iter()
        .map(|&d| sweep_point(template, e, d))
        .collect()
}

/// Detuning at which the anisotropic bound state disappears.
///
/// Bisects on bound-state existence until the bracket is narrower than
/// `TRANSITION_WIDTH * beta` and returns its midpoint.
pub fn locate_transition(template: &ReservoirParams, bracket: (f64, f64)) -> Result<f64> {
    if template.model() != DispersionModel::Anisotropic {
        return Err(Error::ModelMismatch {
            expected: DispersionModel::Anisotropic.name(),
            found: template.model().to_string(),
        });
    }
    let bound =
        |d: f64| -> Result<bool> { Ok(find_roots(&template.with_delta(d)?)?.bound_state()) };
    let (mut lo, mut hi) = bracket;
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::Bracket(format!("need lo < hi, got [{lo}, {hi}]")));
    }
    if !bound(lo)? {
        return Err(Error::Bracket(format!(
            "no bound state at the lower end {lo}"
        )));
    }
    if bound(hi)? {
        return Err(Error::Bracket(format!(
            "bound state still present at the upper end {hi}"
        )));
    }
    let width = TRANSITION_WIDTH * template.beta();
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if bound(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn write_rows<W: Write, R: Serialize>(mut out: W, schema: &str, rows: &[R]) -> Result<()> {
    writeln!(out, "{schema}")?;
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<R: std::io::Read, T: for<'de> Deserialize<'de>>(input: R) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let mut rows = Vec::new();
    for row in r.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

pub fn write_timeseries_csv<W: Write>(out: W, rows: &[TimeSeriesRow]) -> Result<()> {
    if rows.is_empty() {
        // Header only: serde writes it with the first record.
        let mut out = out;
        writeln!(out, "{TIMESERIES_SCHEMA}\nt,population,xi2,zeta2")?;
        return Ok(());
    }
    write_rows(out, TIMESERIES_SCHEMA, rows)
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    if rows.is_empty() {
        let mut out = out;
        writeln!(
            out,
            "{SWEEP_SCHEMA}\ndelta,steady_population,zeta2_inf,bound_state"
        )?;
        return Ok(());
    }
    write_rows(out, SWEEP_SCHEMA, rows)
}

pub fn read_timeseries_csv<R: std::io::Read>(input: R) -> Result<Vec<TimeSeriesRow>> {
    read_rows(input)
}

pub fn read_sweep_csv<R: std::io::Read>(input: R) -> Result<Vec<SweepRow>> {
    read_rows(input)
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl SuiteResult {
    fn within(name: &str, max_deviation: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            passed: max_deviation <= tolerance,
            max_deviation,
            tolerance,
            detail,
        }
    }

    fn failed(name: &str, tolerance: f64, err: &Error) -> Self {
        Self {
            name: name.into(),
            passed: false,
            max_deviation: f64::INFINITY,
            tolerance,
            detail: err.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

impl ValidationReport {
    pub fn suite(&self, name: &str) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.name == name)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ValidationOptions {
    /// Constant phase added to the oracle's time kernel. Nonzero values are
    /// a deliberate fault that the oracle suite must catch.
    pub kernel_phase_error: f64,
}

/// Parameter sets of the oracle-agreement suite: isotropic detunings, then
/// anisotropic ones at `omega_c = 100`.
pub fn oracle_parameter_sets() -> Vec<ReservoirParams> {
    let mut out = Vec::new();
    for d in [-10.0, -5.0, 0.0, 1.0, 5.0] {
        out.push(ReservoirParams::isotropic(d, 1.0).expect("valid isotropic set"));
    }
    for d in [-1.0, -0.2, 0.0, 0.2, 1.0] {
        out.push(ReservoirParams::anisotropic(d, 1.0, 100.0).expect("valid anisotropic set"));
    }
    out
}

/// Survival values for the completeness check (golden-ratio sequence plus both ends).
pub fn survival_samples(n: usize) -> Vec<f64> {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut v: Vec<f64> = (0..n.saturating_sub(2))
        .map(|k| (k as f64 * phi).fract())
        .collect();
    v.push(0.0);
    v.push(1.0);
    v
}

fn squeezing_suite() -> SuiteResult {
    let name = "squeezing_brute_force";
    let tol = 1e-8;
    let cases: Vec<(usize, f64, f64)> = (2..=10)
        .flat_map(|n| [0.05, 0.15, 0.3].into_iter().map(move |th| (n, th * PI)))
        .flat_map(|(n, th)| {
            [0.0, 0.25, 0.5, 0.75, 1.0]
                .into_iter()
                .map(move |p| (n, th, p))
        })
        .collect();
    let out: Result<Vec<f64>> = cases
        .par_iter()
        .map(|&(n, th, p)| {
            let e = EnsembleParams::new(n, th)?;
            let closed = xi_squared(&evolved_moments(&initial_moments(&e), p)?, n)?.xi2;
            let brute = squeezing::brute_force_xi(&e, p)?.xi2;
            Ok((closed - brute).abs())
        })
        .collect();
    match out {
        Ok(d) => SuiteResult::within(
            name,
            d.iter().copied().fold(0.0, f64::max),
            tol,
            format!("{} cases", d.len()),
        ),
        Err(e) => SuiteResult::failed(name, tol, &e),
    }
}

fn channel_suite() -> SuiteResult {
    let name = "channel_reduction";
    let tol = 1e-10;
    let run = || -> Result<(f64, usize)> {
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for n in 2..=10 {
            for th in [0.05, 0.15, 0.3] {
                let e = EnsembleParams::new(n, th * PI)?;
                let psi = squeezing::brute_force_state(&e)?;
                let pair = squeezing::leading_pair(&psi)?;
                for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
                    let damped = crate::channel::apply_product(&pair, &kraus(p)?, 2)?;
                    let got = squeezing::moments_from_pair(&damped)?;
                    let want = evolved_moments(&initial_moments(&e), p)?;
                    worst = worst
                        .max((got.sz - want.sz).abs())
                        .max((got.spm - want.spm).abs())
                        .max((got.smm - want.smm).norm());
                    count += 1;
                }
            }
        }
        Ok((worst, count))
    };
    match run() {
        Ok((d, n)) => SuiteResult::within(name, d, tol, format!("{n} cases")),
        Err(e) => SuiteResult::failed(name, tol, &e),
    }
}

fn completeness_suite() -> SuiteResult {
    let name = "kraus_completeness";
    let tol = 1e-14;
    let samples = survival_samples(1000);
    let out: Result<f64> = samples
        .iter()
        .map(|&p| Ok(kraus(p)?.completeness_defect()))
        .try_fold(0.0, |acc: f64, d: Result<f64>| Ok(acc.max(d?)));
    match out {
        Ok(d) => SuiteResult::within(name, d, tol, format!("{} survival values", samples.len())),
        Err(e) => SuiteResult::failed(name, tol, &e),
    }
}

fn oracle_suite(opts: &ValidationOptions) -> SuiteResult {
    let name = "oracle_agreement";
    let tol = 1e-3;
    let grid = TimeGrid::uniform(10.0, 200).expect("valid grid");
    let out: Vec<Result<f64>> = oracle_parameter_sets()
        .par_iter()
        .map(|p| {
            let closed = reservoir::amplitude(p, &grid)?;
            let kernel = kernel_for(p).with_phase_error(opts.kernel_phase_error);
            let run = volterra::solve_with(&kernel, &grid, &VolterraOptions::default())?;
            if !run.converged {
                return Err(Error::Convergence(format!(
                    "oracle halving change {:e}",
                    run.halving_change
                )));
            }
            Ok(closed
                .amplitude
                .iter()
                .zip(&run.series.amplitude)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max))
        })
        .collect();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (p, r) in oracle_parameter_sets().iter().zip(out) {
        match r {
            Ok(d) => {
                worst = worst.max(d);
                parts.push(format!("{} delta={}: {:.3e}", p.model(), p.delta(), d));
            }
            Err(e) => return SuiteResult::failed(name, tol, &e),
        }
    }
    SuiteResult::within(name, worst, tol, parts.join("; "))
}

fn transform_suite(opts: &ValidationOptions) -> SuiteResult {
    let name = "kernel_transform";
    let tol = 1e-6;
    let out: Result<f64> = oracle_parameter_sets()
        .iter()
        .map(|p| {
            kernel_for(p)
                .with_phase_error(opts.kernel_phase_error)
                .transform_mismatch(&transform_check_points(p.beta()))
        })
        .try_fold(0.0, |acc: f64, d| Ok(acc.max(d?)));
    match out {
        Ok(d) => SuiteResult::within(name, d, tol, "10 points per parameter set".into()),
        Err(e) => SuiteResult::failed(name, tol, &e),
    }
}

fn plateau_suite() -> SuiteResult {
    let name = "long_time_plateau";
    let tol = 1e-3;
    let run = || -> Result<f64> {
        let p = ReservoirParams::isotropic(-10.0, 1.0)?;
        let cf = ClosedForm::new(&p)?;
        Ok((cf.eval(50.0)?.norm_sqr() - cf.steady_population()).abs())
    };
    match run() {
        Ok(d) => SuiteResult::within(name, d, tol, "isotropic delta=-10, t=50".into()),
        Err(e) => SuiteResult::failed(name, tol, &e),
    }
}

fn markov_suite() -> SuiteResult {
    let name = "markov_limit";
    let tol = 1e-8;
    let run = || -> Result<f64> {
        let p = ReservoirParams::free_space(1.0)?;
        let grid = TimeGrid::uniform(10.0, 200)?;
        let closed = reservoir::amplitude(&p, &grid)?;
        let oracle = volterra::solve(&p, &grid)?;
        let mut worst: f64 = 0.0;
        for ((t, a), b) in closed
            .times
            .iter()
            .zip(&closed.population)
            .zip(&oracle.population)
        {
            let exact = (-t).exp();
            worst = worst.max((a - exact).abs()).max((b - exact).abs());
        }
        Ok(worst)
    };
    match run() {
        Ok(d) => SuiteResult::within(name, d, tol, "free space, beta_0 = 1".into()),
        Err(e) => SuiteResult::failed(name, tol, &e),
    }
}

pub fn run_validation() -> ValidationReport {
    run_validation_with(&ValidationOptions::default())
}

pub fn run_validation_with(opts: &ValidationOptions) -> ValidationReport {
    let suites = vec![
        squeezing_suite(),
        channel_suite(),
        completeness_suite(),
        oracle_suite(opts),
        transform_suite(opts),
        plateau_suite(),
        markov_suite(),
    ];
    ValidationReport {
        passed: suites.iter().all(|s| s.passed),
        suites,
    }
}
