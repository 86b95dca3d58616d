//! JSON experiment configuration.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::builtin::{builtin_target, matrix, vector};
use crate::error::{Error, Result};
use crate::projection::Tolerances;
use crate::target::{CostModel, FiniteTarget, GaussianTarget};
use crate::variance::ScanPolicy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum TargetSpec {
    Finite {
        joint: Vec<Vec<f64>>,
    },
    Gaussian {
        p: usize,
        m1: Vec<f64>,
        m2: f64,
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    Builtin {
        name: String,
    },
}

/// A validated target.
#[derive(Debug, Clone)]
pub enum Target {
    Finite(FiniteTarget),
    Gaussian(GaussianTarget),
}

impl TargetSpec {
    pub fn build(&self) -> Result<Target> {
        match self {
            TargetSpec::Finite { joint } => Ok(Target::Finite(FiniteTarget::new(matrix(joint, "joint")?)?)),
            TargetSpec::Gaussian { p, m1, m2, a, b } => {
                if m1.len() != *p || b.len() != *p {
                    return Err(Error::InvalidGaussian(format!("m1 and b must have length p = {p}")));
                }
                Ok(Target::Gaussian(GaussianTarget::new(vector(m1), *m2, matrix(a, "A")?, vector(b))?))
            }
            TargetSpec::Builtin { name } => builtin_target(name)?.build(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum FunctionSpec {
    /// `1{x_coordinate = index}`, coordinate 1 or 2.
    Indicator { coordinate: usize, index: usize },
    /// Values on the grid, `values[i][j] = f(i, j)`.
    Table { values: Vec<Vec<f64>> },
    /// `x₂ − m₂ + bᵀ(x₁ − m₁)` on a Gaussian target.
    Example1,
}

impl FunctionSpec {
    /// Row-major grid values for a finite target.
    pub fn table(&self, target: &FiniteTarget) -> Result<Vec<f64>> {
        let (n1, n2) = (target.n1(), target.n2());
        match self {
            FunctionSpec::Indicator { coordinate, index } => {
                let limit = match coordinate {
                    1 => n1,
                    2 => n2,
                    _ => return Err(Error::Config(format!("indicator coordinate must be 1 or 2, got {coordinate}"))),
                };
                if *index >= limit {
                    return Err(Error::Config(format!("indicator index {index} out of range for coordinate {coordinate}")));
                }
                Ok((0..n1 * n2)
                    .map(|g| {
                        let hit = if *coordinate == 1 { g / n2 == *index } else { g % n2 == *index };
                        if hit { 1.0 } else { 0.0 }
                    })
                    .collect())
            }
            FunctionSpec::Table { values } => {
                let m = matrix(values, "function table")?;
                if m.nrows() != n1 || m.ncols() != n2 {
                    return Err(Error::Config(format!("function table must be {n1}x{n2}")));
                }
                Ok((0..n1 * n2).map(|g| m[(g / n2, g % n2)]).collect())
            }
            FunctionSpec::Example1 => Err(Error::Config("function example1 needs a Gaussian target".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Analysis {
    Variance,
    Rates,
    Orderings,
    Simulate,
    Sharpness,
    Curves,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    #[serde(rename = "T")]
    pub t: usize,
    pub seed: u64,
    #[serde(default = "one")]
    pub replicates: usize,
    #[serde(default)]
    pub batch_len: Option<usize>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpnessSpec {
    #[serde(default = "default_sharp_r")]
    pub r: f64,
    #[serde(default = "default_eta_factor")]
    pub eta_factor: f64,
}

fn default_sharp_r() -> f64 {
    0.3
}

fn default_eta_factor() -> f64 {
    0.95
}

impl Default for SharpnessSpec {
    fn default() -> Self {
        SharpnessSpec { r: default_sharp_r(), eta_factor: default_eta_factor() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvesSpec {
    #[serde(rename = "T", default = "default_curve_t")]
    pub t: usize,
    /// Point-mass starting cells `[i, j]`.
    #[serde(default = "default_initial")]
    pub initial: Vec<[usize; 2]>,
}

fn default_curve_t() -> usize {
    200
}

fn default_initial() -> Vec<[usize; 2]> {
    vec![[0, 0]]
}

impl Default for CurvesSpec {
    fn default() -> Self {
        CurvesSpec { t: default_curve_t(), initial: default_initial() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    pub zero: f64,
    pub one: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub target: TargetSpec,
    #[serde(default = "all_policies")]
    pub policies: Vec<ScanPolicy>,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default)]
    pub functions: BTreeMap<String, FunctionSpec>,
    #[serde(default = "default_analyses")]
    pub analyses: Vec<Analysis>,
    #[serde(default)]
    pub simulation: Option<SimulationSpec>,
    #[serde(default)]
    pub sharpness: Option<SharpnessSpec>,
    #[serde(default)]
    pub curves: Option<CurvesSpec>,
    #[serde(default)]
    pub tolerances: Option<ToleranceSpec>,
}

pub fn all_policies() -> Vec<ScanPolicy> {
    vec![ScanPolicy::Dg, ScanPolicy::Rg { r: 0.5 }, ScanPolicy::Mdg { l: 2 }, ScanPolicy::Rss]
}

fn default_tau() -> f64 {
    1.0
}

fn default_analyses() -> Vec<Analysis> {
    vec![Analysis::Variance, Analysis::Rates, Analysis::Orderings]
}

impl ExperimentConfig {
    /// Config for a built-in target with default settings.
    pub fn for_builtin(name: &str) -> Self {
        ExperimentConfig {
            target: TargetSpec::Builtin { name: name.to_string() },
            policies: all_policies(),
            tau: default_tau(),
            functions: BTreeMap::new(),
            analyses: default_analyses(),
            simulation: None,
            sharpness: None,
            curves: None,
            tolerances: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks parameters that the schema alone cannot.
    pub fn validate(&self) -> Result<()> {
        if self.policies.is_empty() {
            return Err(Error::Config("at least one policy is required".into()));
        }
        for p in &self.policies {
            p.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        CostModel::new(self.tau).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(sim) = &self.simulation {
            if sim.t == 0 || sim.replicates == 0 {
                return Err(Error::Config("simulation needs T >= 1 and replicates >= 1".into()));
            }
        }
        if let Some(s) = &self.sharpness {
            ScanPolicy::Rg { r: s.r }.validate().map_err(|e| Error::Config(e.to_string()))?;
            if s.eta_factor.is_nan() || s.eta_factor <= 0.0 {
                return Err(Error::Config("sharpness eta_factor must be positive".into()));
            }
        }
        if let Some(t) = &self.tolerances {
            if !(t.zero > 0.0 && t.one > 0.0 && t.zero < 0.5 && t.one < 0.5) {
                return Err(Error::Config("tolerances must lie in (0, 0.5)".into()));
            }
        }
        Ok(())
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances.as_ref().map_or_else(Tolerances::default, |t| Tolerances { zero: t.zero, one: t.one })
    }

    /// Named functions, filling in defaults when none are configured.
    pub fn resolved_functions(&self, target: &Target) -> Result<BTreeMap<String, FunctionSpec>> {
        let fs = if self.functions.is_empty() {
            match target {
                Target::Finite(_) => BTreeMap::from([
                    ("x1_is_0".to_string(), FunctionSpec::Indicator { coordinate: 1, index: 0 }),
                    ("x2_is_0".to_string(), FunctionSpec::Indicator { coordinate: 2, index: 0 }),
                ]),
                Target::Gaussian(_) => BTreeMap::from([("example1".to_string(), FunctionSpec::Example1)]),
            }
        } else {
            self.functions.clone()
        };
        for (name, spec) in &fs {
            match (target, spec) {
                (Target::Finite(t), s) => {
                    s.table(t).map_err(|e| Error::Config(format!("function {name}: {e}")))?;
                }
                (Target::Gaussian(_), FunctionSpec::Example1) => {}
                (Target::Gaussian(_), _) => {
                    return Err(Error::Config(format!("function {name}: Gaussian targets support example1 only")));
                }
            }
        }
        Ok(fs)
    }
}

/// A single-policy simulation request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub target: TargetSpec,
    pub policy: ScanPolicy,
    #[serde(rename = "T")]
    pub t: usize,
    pub seed: u64,
    #[serde(default = "one")]
    pub replicates: usize,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default)]
    pub functions: BTreeMap<String, FunctionSpec>,
    #[serde(default)]
    pub batch_len: Option<usize>,
}

impl RunManifest {
    pub fn into_config(self) -> ExperimentConfig {
        ExperimentConfig {
            target: self.target,
            policies: vec![self.policy],
            tau: self.tau,
            functions: self.functions,
            analyses: vec![Analysis::Simulate],
            simulation: Some(SimulationSpec { t: self.t, seed: self.seed, replicates: self.replicates, batch_len: self.batch_len }),
            sharpness: None,
            curves: None,
            tolerances: None,
        }
    }
}

/// Reads either an experiment config or a run manifest (recognized by its `policy` key).
pub fn load_simulation_input(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    if value.get("policy").is_some() {
        let manifest: RunManifest = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        let cfg = manifest.into_config();
        cfg.validate()?;
        Ok(cfg)
    } else {
        ExperimentConfig::from_json(&text)
    }
}
