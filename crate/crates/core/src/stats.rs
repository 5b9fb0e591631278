//! Marginal tail means and the predictors built on them.
//!
//! For factor l at level x, the tail mean with fraction alpha is the
//! average of the lowest ceil(m * alpha) responses among the m runs
//! observed at that level; alpha = 0 is read as the limit, the plain
//! minimum. The ATM predictor picks, independently per factor, the
//! level with the smallest tail mean. Two special cases have their own
//! names: alpha = 1 for every factor is the marginal-mean predictor
//! (AM), and the pick-the-winner predictor (PW) returns the setting of
//! the best observed run, which matches the alpha = 0 choice whenever
//! the per-factor minimizers are unique.
//!
//! Ties are broken deterministically: predictors keep the lowest level
//! index, PW keeps the earliest run. Levels with no observations are
//! skipped; they can never be predicted.

use crate::error::{Error, Result};
use crate::space::{ObservationSet, Setting};
use serde::{Deserialize, Serialize};
use std::fmt;

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidAlpha(format!(
            "tail fraction must lie in [0, 1], got {}",
            alpha
        )));
    }
    Ok(())
}

/// Per-factor tail fractions, each in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AlphaVector(Vec<f64>);

impl AlphaVector {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::InvalidAlpha("empty alpha vector".into()));
        }
        for &a in &alphas {
            check_alpha(a)?;
        }
        Ok(AlphaVector(alphas))
    }

    /// The same fraction for every factor.
    pub fn uniform(alpha: f64, p: usize) -> Result<Self> {
        AlphaVector::new(vec![alpha; p])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, l: usize) -> f64 {
        self.0[l]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }
}

impl fmt::Display for AlphaVector {
    /// Fractions joined by dashes: `0.3-1-0.55`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "-")?;
            }
            write!(f, "{}", a)?;
        }
        Ok(())
    }
}

/// Mean of the lowest ceil(m * alpha) values; the minimum when alpha = 0.
pub fn tail_mean(values: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if values.is_empty() {
        return Err(Error::EmptyData("tail mean of no values".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    if alpha == 0.0 {
        return Ok(v[0]);
    }
    let k = ((v.len() as f64 * alpha).ceil() as usize).clamp(1, v.len());
    Ok(v[..k].iter().sum::<f64>() / k as f64)
}

/// One (factor, level) cell of a marginal profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalStat {
    /// 0-based factor index.
    pub factor: usize,
    /// 1-based level.
    pub level: usize,
    pub alpha: f64,
    /// Tail mean, or `None` when the level has no observations.
    pub stat: Option<f64>,
    pub count: usize,
}

/// Tail means for every (factor, level) cell of an observation set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalProfile {
    pub rows: Vec<MarginalStat>,
}

impl MarginalProfile {
    /// Rows for factor `l`, in level order.
    pub fn factor(&self, l: usize) -> impl Iterator<Item = &MarginalStat> {
        self.rows.iter().filter(move |r| r.factor == l)
    }

    /// CSV with header `factor,level,alpha,stat,count`; factors are
    /// rendered 1-based to match the `f1..fp` column convention, and
    /// empty cells print `NA`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("factor,level,alpha,stat,count\n");
        for r in &self.rows {
            let stat = match r.stat {
                Some(v) => format!("{}", v),
                None => "NA".into(),
            };
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.factor + 1,
                r.level,
                r.alpha,
                stat,
                r.count
            ));
        }
        out
    }
}

/// Tail means of every level of every factor at the given fractions.
pub fn marginal_profile(obs: &ObservationSet, alphas: &AlphaVector) -> Result<MarginalProfile> {
    let p = obs.p();
    if alphas.len() != p {
        return Err(Error::InvalidArgument(format!(
            "{} tail fractions for {} factors",
            alphas.len(),
            p
        )));
    }
    let mut rows = Vec::new();
    for l in 0..p {
        let alpha = alphas.get(l);
        for level in 1..=obs.design.profile()[l] {
            let values = obs.project_marginal(l, level);
            let stat = if values.is_empty() {
                None
            } else {
                Some(tail_mean(&values, alpha)?)
            };
            rows.push(MarginalStat { factor: l, level, alpha, stat, count: values.len() });
        }
    }
    Ok(MarginalProfile { rows })
}

/// ATM: per factor, the observed level with the smallest tail mean.
/// Ties keep the lowest level index.
pub fn predict_atm(obs: &ObservationSet, alphas: &AlphaVector) -> Result<Setting> {
    let profile = marginal_profile(obs, alphas)?;
    let mut levels = Vec::with_capacity(obs.p());
    for l in 0..obs.p() {
        let best = profile
            .factor(l)
            .filter_map(|r| r.stat.map(|s| (r.level, s)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        match best {
            Some((level, _)) => levels.push(level),
            None => {
                return Err(Error::EmptyData(format!(
                    "factor {} has no observed levels",
                    l + 1
                )))
            }
        }
    }
    Ok(Setting::new(levels))
}

/// AM: the marginal-mean predictor, ATM with every fraction at 1.
pub fn predict_am(obs: &ObservationSet) -> Result<Setting> {
    predict_atm(obs, &AlphaVector::uniform(1.0, obs.p())?)
}

/// PW: the setting of the best observed run; earliest run on ties.
pub fn predict_pw(obs: &ObservationSet) -> Result<Setting> {
    if obs.n() == 0 {
        return Err(Error::EmptyData("no observations".into()));
    }
    let best = obs
        .y
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .unwrap();
    Ok(obs.design.setting(best))
}
