//! Experiment spec files: a flat TOML document describing one
//! benchmark run. See docs/formats.md for the field-by-field contract.

use anyhow::{bail, Context, Result};
use atm_core::sel::SelMethod;
use atm_core::space::FactorKind;
use atm_core::testbed::{builtin, discretize, DiscretizedObjective};
use serde::Deserialize;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

/// One benchmark experiment, as read from disk. Field names match the
/// TOML keys one to one.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Built-in objective name: friedman, detpep10, detpep10e,
    /// camel6, shubert.
    pub objective: String,
    /// Dimension, for the objectives that take one.
    #[serde(default)]
    pub p: Option<usize>,
    /// Levels per factor.
    pub levels: usize,
    pub methods: Vec<String>,
    /// Eliminations per session; stages run 0..=t_elim.
    #[serde(default)]
    pub t_elim: usize,
    pub replications: usize,
    #[serde(default)]
    pub noise_sd: f64,
    /// Per-stage design-size multipliers; the last entry repeats.
    #[serde(default = "default_augment")]
    pub augment: Vec<usize>,
    pub base_seed: u64,
    pub out_dir: PathBuf,
}

fn default_augment() -> Vec<usize> {
    vec![1]
}

/// A spec whose every field has been resolved against the toolkit.
#[derive(Debug, Clone)]
pub struct ValidSpec {
    pub raw: ExperimentSpec,
    pub methods: Vec<Method>,
    pub profile: Vec<usize>,
}

/// The optimizers the harness can race.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Sel(SelMethod),
    Ei(EiKernel),
    /// Plain marginal-means pick on one designed batch.
    Am,
    /// Best observed run on one designed batch.
    Pw,
    /// Marginal tail-means pick at one fixed common tail fraction.
    AtmFixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EiKernel {
    /// Squared level-index distances for every factor.
    Ordinal,
    /// Mismatch indicators for every factor.
    Nominal,
    /// Each factor keeps its declared kind.
    Mixed,
}

impl EiKernel {
    pub fn kinds(&self, declared: &[FactorKind], p: usize) -> Vec<FactorKind> {
        match self {
            EiKernel::Ordinal => vec![FactorKind::Ordinal; p],
            EiKernel::Nominal => vec![FactorKind::Nominal; p],
            EiKernel::Mixed => declared.to_vec(),
        }
    }
}

impl FromStr for Method {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(alpha) = s.strip_prefix("atm-fixed:") {
            let a: f64 = alpha
                .parse()
                .with_context(|| format!("methods: bad tail fraction in {:?}", s))?;
            if !(0.0..=1.0).contains(&a) {
                bail!("methods: tail fraction {} outside [0, 1]", a);
            }
            return Ok(Method::AtmFixed(a));
        }
        Ok(match s {
            "sel.mean" => Method::Sel(SelMethod::Mean),
            "sel.min" => Method::Sel(SelMethod::Min),
            "sel.atm" => Method::Sel(SelMethod::Atm),
            "ei.ord" => Method::Ei(EiKernel::Ordinal),
            "ei.nom" => Method::Ei(EiKernel::Nominal),
            "ei.mix" => Method::Ei(EiKernel::Mixed),
            "am" => Method::Am,
            "pw" => Method::Pw,
            _ => bail!(
                "methods: unknown method {:?} (expected sel.mean, sel.min, sel.atm, \
                 ei.ord, ei.nom, ei.mix, am, pw, or atm-fixed:<fraction>)",
                s
            ),
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Sel(SelMethod::Mean) => write!(f, "sel.mean"),
            Method::Sel(SelMethod::Min) => write!(f, "sel.min"),
            Method::Sel(SelMethod::Atm) => write!(f, "sel.atm"),
            Method::Ei(EiKernel::Ordinal) => write!(f, "ei.ord"),
            Method::Ei(EiKernel::Nominal) => write!(f, "ei.nom"),
            Method::Ei(EiKernel::Mixed) => write!(f, "ei.mix"),
            Method::Am => write!(f, "am"),
            Method::Pw => write!(f, "pw"),
            Method::AtmFixed(a) => write!(f, "atm-fixed:{}", a),
        }
    }
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<ExperimentSpec> {
        toml::from_str(text).context("spec file")
    }

    /// Full validation; every complaint names its field.
    pub fn validate(self) -> Result<ValidSpec> {
        if self.replications == 0 {
            bail!("replications: must be at least 1");
        }
        if self.methods.is_empty() {
            bail!("methods: at least one method required");
        }
        if self.levels < 2 {
            bail!("levels: need at least 2 levels, got {}", self.levels);
        }
        if self.t_elim >= self.levels {
            bail!(
                "t_elim: {} eliminations would exhaust {} levels",
                self.t_elim,
                self.levels
            );
        }
        if !self.noise_sd.is_finite() || self.noise_sd < 0.0 {
            bail!("noise_sd: bad value {}", self.noise_sd);
        }
        if self.augment.is_empty() || self.augment.contains(&0) {
            bail!("augment: multipliers must be positive");
        }
        let methods: Vec<Method> = self
            .methods
            .iter()
            .map(|m| m.parse())
            .collect::<Result<_>>()?;
        let f = builtin(&self.objective, self.p).context("objective")?;
        let profile = vec![self.levels; f.dim()];
        Ok(ValidSpec { raw: self, methods, profile })
    }

    /// A fresh objective instance with its own evaluation counter and
    /// noise stream. One per (method, replication), so budgets and
    /// noise are accounted per run.
    pub fn objective(&self, noise_seed: u64) -> Result<DiscretizedObjective> {
        let f = builtin(&self.objective, self.p)?;
        let obj = discretize(&f, self.levels)?;
        if self.noise_sd > 0.0 {
            Ok(obj.with_noise(self.noise_sd, noise_seed)?)
        } else {
            Ok(obj)
        }
    }
}
