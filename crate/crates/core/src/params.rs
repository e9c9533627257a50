//! Physical and ensemble parameters plus the flat `key = value` config format.
//!
//! Every quantity is dimensionless. Frequencies (`delta`, `omega_c`) and the
//! rate scale `beta` share one frequency unit, and times are in its inverse.
//! With the default `beta = 1` this is the usual "units of β" convention.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Photonic reservoir dispersion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DispersionModel {
    /// Band edge with a singular density of states (|k| dependence only).
    Isotropic,
    /// Band edge at discrete symmetry points; finite density of states.
    Anisotropic,
    /// Flat spectrum, memoryless exponential decay.
    FreeSpace,
}

impl DispersionModel {
    pub fn name(self) -> &'static str {
        match self {
            DispersionModel::Isotropic => "isotropic",
            DispersionModel::Anisotropic => "anisotropic",
            DispersionModel::FreeSpace => "freespace",
        }
    }
}

impl fmt::Display for DispersionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DispersionModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "isotropic" | "iso" => Ok(DispersionModel::Isotropic),
            "anisotropic" | "aniso" => Ok(DispersionModel::Anisotropic),
            "freespace" | "free_space" | "free-space" => Ok(DispersionModel::FreeSpace),
            _ => Err(Error::invalid(
                "model",
                s,
                "expected isotropic, anisotropic or freespace",
            )),
        }
    }
}

/// Reservoir seen by every atom.
///
/// `omega_c` is only meaningful for the anisotropic model, where it is the
/// band-edge frequency that also sets the spectral cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReservoirParams {
    model: DispersionModel,
    delta: f64,
    beta: f64,
    omega_c: Option<f64>,
}

impl ReservoirParams {
    pub fn new(
        model: DispersionModel,
        delta: f64,
        beta: f64,
        omega_c: Option<f64>,
    ) -> Result<Self> {
        if !delta.is_finite() {
            return Err(Error::invalid("delta", delta, "must be finite"));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::invalid("beta", beta, "must be > 0"));
        }
        let omega_c = match model {
            DispersionModel::Anisotropic => {
                let wc = omega_c.ok_or_else(|| Error::MissingKey {
                    key: "omega_c".into(),
                })?;
                if !(wc.is_finite() && wc > 0.0) {
                    return Err(Error::invalid("omega_c", wc, "must be > 0"));
                }
                if delta.abs() > wc {
                    return Err(Error::invalid(
                        "delta",
                        delta,
                        format!("|delta| must not exceed omega_c = {wc}"),
                    ));
                }
                Some(wc)
            }
            _ => None,
        };
        Ok(Self {
            model,
            delta,
            beta,
            omega_c,
        })
    }

    pub fn isotropic(delta: f64, beta: f64) -> Result<Self> {
        Self::new(DispersionModel::Isotropic, delta, beta, None)
    }

    pub fn anisotropic(delta: f64, beta: f64, omega_c: f64) -> Result<Self> {
        Self::new(DispersionModel::Anisotropic, delta, beta, Some(omega_c))
    }

    /// Memoryless reservoir; `decay_rate` is the population decay rate.
    pub fn free_space(decay_rate: f64) -> Result<Self> {
        Self::new(DispersionModel::FreeSpace, 0.0, decay_rate, None)
    }

    pub fn model(&self) -> DispersionModel {
        self.model
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Band-edge frequency; `None` unless the model is anisotropic.
    pub fn omega_c(&self) -> Option<f64> {
        self.omega_c
    }

    /// `beta^{3/2}`, the coupling strength that appears in every pole condition.
    pub fn coupling(&self) -> f64 {
        self.beta * self.beta.sqrt()
    }

    /// Same reservoir at a different detuning.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(self.model, delta, self.beta, self.omega_c)
    }
}

/// N identical two-level atoms prepared in a one-axis twisted state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnsembleParams {
    n_atoms: usize,
    theta: f64,
}

impl EnsembleParams {
    pub const DEFAULT_N_ATOMS: usize = 10;
    pub const DEFAULT_THETA: f64 = 0.15 * PI;

    pub fn new(n_atoms: usize, theta: f64) -> Result<Self> {
        if n_atoms < 2 {
            return Err(Error::invalid("n_atoms", n_atoms, "need at least 2 atoms"));
        }
        if !(theta > 0.0 && theta < PI) {
            return Err(Error::invalid("theta", theta, "must lie in (0, pi)"));
        }
        Ok(Self { n_atoms, theta })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

impl Default for EnsembleParams {
    fn default() -> Self {
        Self {
            n_atoms: Self::DEFAULT_N_ATOMS,
            theta: Self::DEFAULT_THETA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Spacing {
    Uniform,
}

/// Uniform time grid `t_k = k * t_max / n_steps`, `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    t_max: f64,
    n_steps: usize,
    spacing: Spacing,
}

impl TimeGrid {
    pub const DEFAULT_T_MAX: f64 = 10.0;
    pub const DEFAULT_N_STEPS: usize = 200;

    pub fn uniform(t_max: f64, n_steps: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::invalid("t_max", t_max, "must be > 0"));
        }
        if n_steps < 2 {
            return Err(Error::invalid("n_steps", n_steps, "need at least 2 steps"));
        }
        Ok(Self {
            t_max,
            n_steps,
            spacing: Spacing::Uniform,
        })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn step(&self) -> f64 {
        self.t_max / self.n_steps as f64
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_max
        } else {
            k as f64 * self.step()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t_max: Self::DEFAULT_T_MAX,
            n_steps: Self::DEFAULT_N_STEPS,
            spacing: Spacing::Uniform,
        }
    }
}

/// Everything a run needs, as parsed from a config document.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunConfig {
    pub reservoir: ReservoirParams,
    pub ensemble: EnsembleParams,
    pub grid: TimeGrid,
}

pub const CONFIG_KEYS: [&str; 8] = [
    "model", "delta", "beta", "omega_c", "n_atoms", "theta", "t_max", "n_steps",
];

/// Raw `key -> value` entries, later entries overriding earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigEntries(BTreeMap<String, String>);

impl ConfigEntries {
    /// Tokenizes a config document.
    ///
    /// Entries are separated by newlines or commas; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = match line.find('#') {
                Some(i) => &line[..i],
                None => line,
            };
            for item in line.split(',') {
                let item = item.trim();
                if item.is_empty() {
                    continue;
                }
                let (key, value) = item.split_once('=').ok_or_else(|| Error::Syntax {
                    line: lineno + 1,
                    text: item.to_string(),
                })?;
                let key = key.trim().to_ascii_lowercase().replace('-', "_");
                let value = value.trim().to_string();
                if !CONFIG_KEYS.contains(&key.as_str()) {
                    return Err(Error::UnknownKey { key, value });
                }
                map.insert(key, value);
            }
        }
        Ok(Self(map))
    }

    /// Sets `key`, overriding any earlier value.
    pub fn set(&mut self, key: &str, value: impl ToString) -> Result<()> {
        let key = key.to_ascii_lowercase().replace('-', "_");
        let value = value.to_string();
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Error::UnknownKey { key, value });
        }
        self.0.insert(key, value);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn merge(&mut self, other: &ConfigEntries) {
        for (k, v) in &other.0 {
            self.0.insert(k.clone(), v.clone());
        }
    }

    /// Validates the entries into a parameter bundle, applying defaults.
    pub fn build(&self) -> Result<RunConfig> {
        let model: DispersionModel = self
            .get("model")
            .ok_or_else(|| Error::MissingKey {
                key: "model".into(),
            })?
            .parse()?;
        let delta = self.real("delta")?.unwrap_or(0.0);
        let beta = self.real("beta")?.unwrap_or(1.0);
        let omega_c = self.real("omega_c")?;
        if model == DispersionModel::Anisotropic && omega_c.is_none() {
            return Err(Error::MissingKey {
                key: "omega_c".into(),
            });
        }
        let reservoir = ReservoirParams::new(model, delta, beta, omega_c)?;

        let n_atoms = self
            .integer("n_atoms")?
            .unwrap_or(EnsembleParams::DEFAULT_N_ATOMS);
        let theta = self.real("theta")?.unwrap_or(EnsembleParams::DEFAULT_THETA);
        let ensemble = EnsembleParams::new(n_atoms, theta)?;

        let t_max = self.real("t_max")?.unwrap_or(TimeGrid::DEFAULT_T_MAX);
        let n_steps = self
            .integer("n_steps")?
            .unwrap_or(TimeGrid::DEFAULT_N_STEPS);
        let grid = TimeGrid::uniform(t_max, n_steps)?;

        Ok(RunConfig {
            reservoir,
            ensemble,
            grid,
        })
    }

    fn real(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| parse_real(key, v)).transpose()
    }

    fn integer(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| Error::invalid(key, v, "expected a non-negative integer"))
            })
            .transpose()
    }
}

/// Parses a real number, accepting a trailing `pi` (e.g. `0.15pi`).
fn parse_real(key: &str, text: &str) -> Result<f64> {
    let t = text.trim();
    let (mantissa, scale) = if let Some(m) = t.strip_suffix("pi").or_else(|| t.strip_suffix('π')) {
        (m.trim().trim_end_matches('*').trim(), PI)
    } else {
        (t, 1.0)
    };
    let value = if mantissa.is_empty() {
        1.0
    } else {
        mantissa
            .parse::<f64>()
            .map_err(|_| Error::invalid(key, text, "expected a real number"))?
    };
    let value = value * scale;
    if !value.is_finite() {
        return Err(Error::invalid(key, text, "must be finite"));
    }
    Ok(value)
}

/// Parses a config document into a validated parameter bundle.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    ConfigEntries::parse(text)?.build()
}

impl RunConfig {
    /// Renders the bundle in the config grammar; `parse_config` inverts it.
    pub fn to_config_string(&self) -> String {
        let r = &self.reservoir;
        let mut out = format!(
            "model = {}\ndelta = {}\nbeta = {}\n",
            r.model(),
            r.delta(),
            r.beta()
        );
        if let Some(wc) = r.omega_c() {
            out.push_str(&format!("omega_c = {wc}\n"));
        }
        out.push_str(&format!(
            "n_atoms = {}\ntheta = {}\nt_max = {}\nn_steps = {}\n",
            self.ensemble.n_atoms(),
            self.ensemble.theta(),
            self.grid.t_max(),
            self.grid.n_steps()
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotropic_defaults_follow_figure_parameters() {
        let cfg = parse_config("model=isotropic, delta=-10, beta=1").unwrap();
        assert_eq!(cfg.reservoir.model(), DispersionModel::Isotropic);
        assert_eq!(cfg.reservoir.delta(), -10.0);
        assert_eq!(cfg.ensemble.n_atoms(), 10);
        assert!((cfg.ensemble.theta() - 0.15 * PI).abs() < 1e-15);
        assert_eq!(cfg.reservoir.omega_c(), None);
    }

    #[test]
    fn anisotropic_accepts_band_edge() {
        let cfg = parse_config("model=anisotropic, delta=0.1, omega_c=100").unwrap();
        assert_eq!(cfg.reservoir.model(), DispersionModel::Anisotropic);
        assert_eq!(cfg.reservoir.omega_c(), Some(100.0));
    }

    #[test]
    fn anisotropic_without_omega_c_names_the_key() {
        let err = parse_config("model=anisotropic, delta=0.1").unwrap_err();
        assert!(matches!(err, Error::MissingKey { ref key } if key == "omega_c"));
        assert!(err.to_string().contains("omega_c"));
    }

    #[test]
    fn unknown_key_reports_key_and_value() {
        let err = parse_config("model=isotropic\ngamma = 3").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("gamma") && msg.contains('3'), "{msg}");
    }

    #[test]
    fn out_of_domain_reports_key_and_value() {
        let err = parse_config("model=isotropic\nbeta = -2").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("beta") && msg.contains("-2"), "{msg}");
        assert!(parse_config("model=isotropic\nn_atoms=1").is_err());
        assert!(parse_config("model=isotropic\ntheta=0").is_err());
        assert!(parse_config("model=anisotropic\nomega_c=1\ndelta=2").is_err());
        assert!(parse_config("beta=1").is_err());
    }

    #[test]
    fn file_grammar_with_comments() {
        let text = "# figure 3\nmodel = anisotropic  # reservoir\n\ndelta = -0.2\nomega_c = 100\ntheta = 0.15pi\nt_max = 20\nn_steps = 400\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.reservoir.delta(), -0.2);
        assert!((cfg.ensemble.theta() - 0.15 * PI).abs() < 1e-15);
        assert_eq!(cfg.grid.n_steps(), 400);
        assert_eq!(cfg.grid.t_max(), 20.0);
    }

    #[test]
    fn malformed_line_is_a_syntax_error() {
        assert!(matches!(
            parse_config("model isotropic"),
            Err(Error::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut entries = ConfigEntries::parse("model=isotropic\ndelta=-5").unwrap();
        entries.set("delta", 2.5).unwrap();
        entries.set("omega-c", 3).unwrap();
        assert_eq!(entries.build().unwrap().reservoir.delta(), 2.5);
        assert!(entries.set("bogus", 1).is_err());
    }

    #[test]
    fn grid_points() {
        let g = TimeGrid::uniform(1.0, 4).unwrap();
        assert_eq!(g.times(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(TimeGrid::uniform(1.0, 1).is_err());
        assert!(TimeGrid::uniform(0.0, 10).is_err());
    }

    #[test]
    fn constructor_boundaries() {
        assert!(ReservoirParams::isotropic(0.0, 0.0).is_err());
        assert!(ReservoirParams::isotropic(f64::NAN, 1.0).is_err());
        assert!(ReservoirParams::anisotropic(0.0, 1.0, 0.0).is_err());
        assert!(EnsembleParams::new(1, 0.3).is_err());
        assert!(EnsembleParams::new(2, 0.0).is_err());
        assert!(EnsembleParams::new(2, PI).is_err());
        assert!(EnsembleParams::new(2, 1e-9).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn model() -> impl Strategy<Value = DispersionModel> {
            prop_oneof![
                Just(DispersionModel::Isotropic),
                Just(DispersionModel::Anisotropic),
                Just(DispersionModel::FreeSpace),
            ]
        }

        proptest! {
            #[test]
            fn config_round_trip(
                model in model(),
                delta in -50.0f64..50.0,
                beta in 1e-3f64..10.0,
                wc_extra in 0.0f64..200.0,
                n in 2usize..40,
                theta in 1e-6f64..(PI - 1e-6),
                t_max in 1e-3f64..100.0,
                n_steps in 2usize..5000,
            ) {
                let omega_c = (model == DispersionModel::Anisotropic).then(|| delta.abs() + wc_extra + 1e-3);
                let delta = if model == DispersionModel::FreeSpace { 0.0 } else { delta };
                let cfg = RunConfig {
                    reservoir: ReservoirParams::new(model, delta, beta, omega_c).unwrap(),
                    ensemble: EnsembleParams::new(n, theta).unwrap(),
                    grid: TimeGrid::uniform(t_max, n_steps).unwrap(),
                };
                let again = parse_config(&cfg.to_config_string()).unwrap();
                prop_assert_eq!(cfg, again);
            }

            #[test]
            fn beta_gate(beta in -10.0f64..10.0) {
                prop_assert_eq!(ReservoirParams::isotropic(0.0, beta).is_ok(), beta > 0.0);
            }

            #[test]
            fn atom_count_gate(n in 0usize..6) {
                prop_assert_eq!(EnsembleParams::new(n, 0.5).is_ok(), n >= 2);
            }

            #[test]
            fn theta_gate(theta in -1.0f64..4.0) {
                prop_assert_eq!(EnsembleParams::new(4, theta).is_ok(), theta > 0.0 && theta < PI);
            }
        }
    }
}
