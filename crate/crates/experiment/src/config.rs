//! Line-oriented `key = value` configs with dotted keys.
//!
//! Resolution order: scenario defaults, then the config file, then `--set`
//! overrides, then `--seed`. Every key must already exist in the defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nhbraid::drive::DriveCoupling;
use nhbraid::evolution::{IntegratorConfig, IntegratorMethod};
use nhbraid::gate::CompositeOrder;
use nhbraid::imperfections::SystematicCoeffError;
use nhbraid::lattice::{ChainParams, ExponentSign, GaussianPerturbation, SystemSpec};
use serde::{Deserialize, Serialize};

use crate::error::{ExperimentError, Result};
use crate::{expr, grid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioName {
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
    Fig3c,
    Fig3d,
    Pi8,
    Custom,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 8] =
        [Self::Fig2a, Self::Fig2b, Self::Fig3a, Self::Fig3b, Self::Fig3c, Self::Fig3d, Self::Pi8, Self::Custom];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Fig2a => "fig2a",
            Self::Fig2b => "fig2b",
            Self::Fig3a => "fig3a",
            Self::Fig3b => "fig3b",
            Self::Fig3c => "fig3c",
            Self::Fig3d => "fig3d",
            Self::Pi8 => "pi8",
            Self::Custom => "custom",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| ExperimentError::config(format!("unknown scenario `{s}`")))
    }
}

const BASE_DEFAULTS: &[(&str, &str)] = &[
    ("chain1.n_sites", "100"),
    ("chain1.mu", "0.02"),
    ("chain1.hopping", "0.1"),
    ("chain1.pairing", "0.1"),
    ("chain2.n_sites", "100"),
    ("chain2.mu", "0.02"),
    ("chain2.hopping", "0.1"),
    ("chain2.pairing", "0.1"),
    ("defect.energy", "3.0"),
    ("perturbation.amplitude", "0"),
    ("perturbation.center", "50"),
    ("perturbation.width", "3"),
    ("perturbation.exponent_sign", "negative"),
    ("drive.theta", "pi/2"),
    ("drive.phi", "pi/2"),
    ("drive.duration", "20"),
    ("drive.frequency", "resonant"),
    ("drive.phase0", "0"),
    ("drive.rwa", "false"),
    ("drive.coupling", "defect-particle"),
    ("drive.truncation", "none"),
    ("composite.enabled", "false"),
    ("composite.order", "theta-first"),
    ("composite.split", "0.5"),
    ("composite.compare", "false"),
    ("composite.compare_theta", "pi/2"),
    ("composite.compare_phi", "pi/2"),
    ("errors.eps1", "0"),
    ("errors.eps2", "0"),
    ("errors.delta0", "0"),
    ("errors.seed", "1"),
    ("ensemble.realizations", "1"),
    ("sweep.parameter", "none"),
    ("sweep.grid", "none"),
    ("integrator.dt", "0.01"),
    ("integrator.method", "midpoint"),
    ("integrator.tolerance", "1e-8"),
    ("integrator.samples", "500"),
    ("output.series", "false"),
    ("output.leakage_threshold", "0.01"),
];

const COMPOSITE_BRAID: &[(&str, &str)] = &[("composite.enabled", "true"), ("drive.theta", "pi/4"), ("drive.phi", "0")];

fn scenario_overrides(name: ScenarioName) -> Vec<(&'static str, &'static str)> {
    let mut v = Vec::new();
    match name {
        ScenarioName::Fig2a => v.push(("output.series", "true")),
        ScenarioName::Fig2b => {
            v.extend([("sweep.parameter", "perturbation.amplitude"), ("sweep.grid", "linspace(0, 0.18, 20)")])
        }
        ScenarioName::Fig3a => {
            v.extend_from_slice(COMPOSITE_BRAID);
            v.push(("output.series", "true"));
        }
        ScenarioName::Fig3b => {
            v.extend_from_slice(COMPOSITE_BRAID);
            v.extend([("errors.delta0", "0.06"), ("ensemble.realizations", "100")]);
        }
        ScenarioName::Fig3c => {
            v.extend_from_slice(COMPOSITE_BRAID);
            v.extend([
                ("drive.truncation", "1"),
                ("sweep.parameter", "chain1.mu, chain2.mu"),
                ("sweep.grid", "linspace(0.005, 0.1, 20)"),
            ]);
        }
        ScenarioName::Fig3d => {
            v.extend_from_slice(COMPOSITE_BRAID);
            v.extend([
                ("composite.compare", "true"),
                ("ensemble.realizations", "10"),
                ("sweep.parameter", "errors.delta0"),
                ("sweep.grid", "logspace(1e-3, 0.15, 20)"),
            ]);
        }
        ScenarioName::Pi8 => v.extend([("composite.enabled", "true"), ("drive.theta", "3*pi/8"), ("drive.phi", "0")]),
        ScenarioName::Custom => {}
    }
    v
}

/// Built-in values for a scenario, before any user input.
pub fn scenario_defaults(name: ScenarioName) -> BTreeMap<String, String> {
    let mut m: BTreeMap<String, String> = BASE_DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    for (k, v) in scenario_overrides(name) {
        m.insert(k.to_string(), v.to_string());
    }
    m
}

pub fn is_known_key(key: &str) -> bool {
    BASE_DEFAULTS.iter().any(|(k, _)| *k == key)
}

fn valid_key_syntax(key: &str) -> bool {
    !key.is_empty()
        && key.split('.').all(|part| {
            !part.is_empty() && part.bytes().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == b'_')
        })
}

fn parse_assignment(text: &str, origin: &str) -> Result<(String, String)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| ExperimentError::config(format!("{origin}: expected `key = value`, got `{text}`")))?;
    let (k, v) = (k.trim(), v.trim());
    if !valid_key_syntax(k) {
        return Err(ExperimentError::config(format!("{origin}: malformed key `{k}`")));
    }
    if v.is_empty() {
        return Err(ExperimentError::config(format!("{origin}: empty value for `{k}`")));
    }
    Ok((k.to_string(), v.to_string()))
}

/// Parses config text; `#` starts a comment, blank lines are skipped and a
/// key may appear only once.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = parse_assignment(line, &format!("line {}", no + 1))?;
        if out.iter().any(|(seen, _)| *seen == k) {
            return Err(ExperimentError::config(format!("line {}: duplicate key `{k}`", no + 1)));
        }
        out.push((k, v));
    }
    Ok(out)
}

/// Parses one `--set key=value` argument.
pub fn parse_override(arg: &str) -> Result<(String, String)> {
    parse_assignment(arg, "--set")
}

/// A fully resolved configuration: every key has a value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub scenario: ScenarioName,
    pub values: BTreeMap<String, String>,
}

impl ResolvedConfig {
    pub fn new(scenario: ScenarioName) -> Self {
        Self { scenario, values: scenario_defaults(scenario) }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !is_known_key(key) {
            return Err(ExperimentError::config(format!("unknown config key `{key}`")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).expect("resolved config holds every key")
    }

    /// Builds and validates a configuration from user inputs.
    pub fn resolve(
        scenario: ScenarioName,
        file_text: Option<&str>,
        overrides: &[String],
        seed: Option<u64>,
    ) -> Result<Self> {
        let mut cfg = Self::new(scenario);
        if let Some(text) = file_text {
            for (k, v) in parse_config_text(text)? {
                cfg.set(&k, &v)?;
            }
        }
        for o in overrides {
            let (k, v) = parse_override(o)?;
            cfg.set(&k, &v)?;
        }
        if let Some(s) = seed {
            cfg.set("errors.seed", &s.to_string())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Rebuilds from a stored value map, rejecting missing or unknown keys.
    pub fn from_values(scenario: ScenarioName, values: BTreeMap<String, String>) -> Result<Self> {
        if let Some(k) = values.keys().find(|k| !is_known_key(k)) {
            return Err(ExperimentError::config(format!("unknown config key `{k}`")));
        }
        if let Some((k, _)) = BASE_DEFAULTS.iter().find(|(k, _)| !values.contains_key(*k)) {
            return Err(ExperimentError::config(format!("missing config key `{k}`")));
        }
        let cfg = Self { scenario, values };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn sweep(&self) -> Result<Option<Sweep>> {
        let param = self.get("sweep.parameter");
        if param == "none" {
            return Ok(None);
        }
        let keys: Vec<String> = param.split(',').map(|k| k.trim().to_string()).collect();
        for k in &keys {
            if !is_known_key(k) || k.starts_with("sweep.") {
                return Err(ExperimentError::config(format!("sweep parameter `{k}` is not a config key")));
            }
        }
        let grid_src = self.get("sweep.grid");
        if grid_src == "none" {
            return Err(ExperimentError::config("sweep.parameter is set but sweep.grid is `none`"));
        }
        Ok(Some(Sweep { keys, values: grid::parse_grid(grid_src)? }))
    }

    /// Configuration with the sweep keys bound to `value`.
    pub fn at_sweep_value(&self, sweep: &Sweep, value: f64) -> Self {
        let mut c = self.clone();
        for k in &sweep.keys {
            c.values.insert(k.clone(), format!("{value}"));
        }
        c
    }

    /// Every concrete point of the run: the base config, or one per sweep value.
    pub fn points(&self) -> Result<Vec<(f64, RunConfig)>> {
        match self.sweep()? {
            None => Ok(vec![(f64::NAN, RunConfig::from_config(self)?)]),
            Some(s) => {
                s.values.iter().map(|&v| Ok((v, RunConfig::from_config(&self.at_sweep_value(&s, v))?))).collect()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.points().map(|_| ())
    }

    /// `key = value` lines in key order, readable by [`parse_config_text`].
    pub fn to_text(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub keys: Vec<String>,
    pub values: Vec<f64>,
}

/// Typed view of one concrete configuration point.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub system: SystemSpec,
    pub theta: f64,
    pub phi: f64,
    pub duration: f64,
    pub frequency: f64,
    pub phase0: f64,
    pub rwa: bool,
    pub coupling: DriveCoupling,
    pub truncation: Option<usize>,
    pub composite: bool,
    pub order: CompositeOrder,
    pub split: f64,
    pub compare_composite: bool,
    /// Angles of the single loop run next to the composite when comparing.
    pub compare_angles: (f64, f64),
    pub systematic: SystematicCoeffError,
    pub delta0: f64,
    pub seed: u64,
    pub realizations: usize,
    pub integrator: IntegratorConfig,
    pub series: bool,
    pub leakage_threshold: f64,
}

fn bad(key: &str, value: &str, what: &str) -> ExperimentError {
    ExperimentError::config(format!("`{key} = {value}`: {what}"))
}

fn real(c: &ResolvedConfig, key: &str) -> Result<f64> {
    let v = c.get(key);
    expr::eval(v).map_err(|e| bad(key, v, &e.to_string()))
}

fn count<T: FromStr>(c: &ResolvedConfig, key: &str) -> Result<T> {
    let v = c.get(key);
    v.parse().map_err(|_| bad(key, v, "expected a non-negative integer"))
}

fn flag(c: &ResolvedConfig, key: &str) -> Result<bool> {
    match c.get(key) {
        "true" => Ok(true),
        "false" => Ok(false),
        v => Err(bad(key, v, "expected `true` or `false`")),
    }
}

fn choice<T: Copy>(c: &ResolvedConfig, key: &str, options: &[(&str, T)]) -> Result<T> {
    let v = c.get(key);
    options.iter().find(|(name, _)| *name == v).map(|(_, t)| *t).ok_or_else(|| {
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        bad(key, v, &format!("expected one of {}", names.join(", ")))
    })
}

fn numeric<T>(key: &str, r: nhbraid::Result<T>) -> Result<T> {
    r.map_err(|e| ExperimentError::config(format!("{key}: {e}")))
}

impl RunConfig {
    pub fn from_config(c: &ResolvedConfig) -> Result<Self> {
        let chain = |prefix: &str| -> Result<ChainParams> {
            numeric(
                prefix,
                ChainParams::new(
                    count(c, &format!("{prefix}.n_sites"))?,
                    real(c, &format!("{prefix}.mu"))?,
                    real(c, &format!("{prefix}.hopping"))?,
                    real(c, &format!("{prefix}.pairing"))?,
                ),
            )
        };
        let amplitude = real(c, "perturbation.amplitude")?;
        let perturbation = if amplitude == 0.0 {
            None
        } else {
            let mut p = numeric(
                "perturbation",
                GaussianPerturbation::new(amplitude, real(c, "perturbation.center")?, real(c, "perturbation.width")?),
            )?;
            p.exponent_sign = choice(
                c,
                "perturbation.exponent_sign",
                &[("negative", ExponentSign::Negative), ("positive", ExponentSign::Positive)],
            )?;
            Some(p)
        };
        let defect_energy = real(c, "defect.energy")?;
        let system =
            numeric("system", SystemSpec::new(chain("chain1")?, chain("chain2")?, defect_energy, perturbation))?;

        let frequency = match c.get("drive.frequency") {
            "resonant" => defect_energy,
            _ => real(c, "drive.frequency")?,
        };
        let truncation = match c.get("drive.truncation") {
            "none" => None,
            _ => Some(count::<usize>(c, "drive.truncation")?),
        };
        if let Some(r) = truncation {
            let n = system.chain1.n_sites.min(system.chain2.n_sites);
            if r > n {
                return Err(bad(
                    "drive.truncation",
                    c.get("drive.truncation"),
                    &format!("radius exceeds chain length {n}"),
                ));
            }
        }
        let split = real(c, "composite.split")?;
        if !(split > 0.0 && split < 1.0) {
            return Err(bad("composite.split", c.get("composite.split"), "must lie in (0, 1)"));
        }
        let duration = real(c, "drive.duration")?;
        if !(duration > 0.0) {
            return Err(bad("drive.duration", c.get("drive.duration"), "must be positive"));
        }
        let systematic =
            numeric("errors", SystematicCoeffError::new(real(c, "errors.eps1")?, real(c, "errors.eps2")?))?;
        let delta0 = real(c, "errors.delta0")?;
        if !(delta0 >= 0.0) {
            return Err(bad("errors.delta0", c.get("errors.delta0"), "must be non-negative"));
        }
        let realizations: usize = count(c, "ensemble.realizations")?;
        if realizations == 0 {
            return Err(bad("ensemble.realizations", "0", "need at least one realization"));
        }
        if realizations > 1 && delta0 == 0.0 {
            return Err(ExperimentError::config("an ensemble of more than one realization needs errors.delta0 > 0"));
        }
        let integrator = IntegratorConfig {
            dt: real(c, "integrator.dt")?,
            method: choice(
                c,
                "integrator.method",
                &[
                    ("midpoint", IntegratorMethod::MidpointExponential),
                    ("magnus4", IntegratorMethod::FourthOrderMagnus),
                ],
            )?,
            tolerance: real(c, "integrator.tolerance")?,
            output_samples: count(c, "integrator.samples")?,
        };
        if !(integrator.dt > 0.0) || !(integrator.tolerance > 0.0) || integrator.output_samples < 2 {
            return Err(ExperimentError::config("integrator needs dt > 0, tolerance > 0 and at least 2 samples"));
        }
        let out = Self {
            system,
            theta: real(c, "drive.theta")?,
            phi: real(c, "drive.phi")?,
            duration,
            frequency,
            phase0: real(c, "drive.phase0")?,
            rwa: flag(c, "drive.rwa")?,
            coupling: choice(
                c,
                "drive.coupling",
                &[("defect-particle", DriveCoupling::DefectParticle), ("particle-hole", DriveCoupling::ParticleHole)],
            )?,
            truncation,
            composite: flag(c, "composite.enabled")?,
            order: choice(
                c,
                "composite.order",
                &[("theta-first", CompositeOrder::ThetaFirst), ("complement-first", CompositeOrder::ComplementFirst)],
            )?,
            split,
            compare_composite: flag(c, "composite.compare")?,
            compare_angles: (real(c, "composite.compare_theta")?, real(c, "composite.compare_phi")?),
            systematic,
            delta0,
            seed: count(c, "errors.seed")?,
            realizations,
            integrator,
            series: flag(c, "output.series")?,
            leakage_threshold: real(c, "output.leakage_threshold")?,
        };
        for v in [out.composite, false] {
            numeric("integrator", out.integrator.validate(&out.protocol(v)?))?;
        }
        Ok(out)
    }
}
