//! Data-driven choice of tail-mean percentages.
//!
//! The tuner fits the interaction surrogate on the observed data, lays
//! a fresh randomized design over the same space, scores that design
//! with the surrogate, and returns the percentage vector whose
//! marginal tail-mean prediction the surrogate likes best. Tuning on a
//! fresh design rather than on the training rows keeps the choice from
//! simply rewarding in-sample fit. Strong fitted interactions pull the
//! winner toward 0 (rank-driven), weak ones toward 1 (plain
//! averaging). The true objective is never consulted.

use crate::error::{Error, Result};
use crate::heredity::{self, SurrogateModel};
use crate::oa::{augment, balanced_random, randomize, smallest_oa, OaRequest};
use crate::rng::{mix_seed, rng_from_seed};
use crate::space::ObservationSet;
use crate::stats::{predict_atm, AlphaVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Number of candidate percentage vectors tried by default.
pub const DEFAULT_CANDIDATES: usize = 200;

/// Knobs for [`tune_alpha`]. The candidate set always contains the
/// all-zeros and all-ones vectors plus one constant vector per grid
/// entry; the rest of `candidate_count` is filled with uniform draws.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuneConfig {
    pub candidate_count: usize,
    /// Constant-percentage candidates, each applied to every factor.
    pub common_alpha_grid: Vec<f64>,
    /// Cap on the synthetic design size; 0 means "observation count".
    /// The effective cap never exceeds the observation count.
    pub synthetic_design_cap: usize,
    pub seed: u64,
}

impl Default for TuneConfig {
    fn default() -> Self {
        TuneConfig {
            candidate_count: DEFAULT_CANDIDATES,
            common_alpha_grid: (1..=9).map(|k| k as f64 / 10.0).collect(),
            synthetic_design_cap: 0,
            seed: 0,
        }
    }
}

impl TuneConfig {
    pub fn with_seed(seed: u64) -> Self {
        TuneConfig { seed, ..TuneConfig::default() }
    }
}

/// One scored candidate, in evaluation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub alphas: AlphaVector,
    /// Surrogate value at the tail-mean prediction this candidate
    /// produces on the synthetic data.
    pub score: f64,
}

/// Result of one tuning pass.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuneOutcome {
    pub alphas: AlphaVector,
    pub surrogate: SurrogateModel,
    /// Every candidate with its score, in the order tried.
    pub diagnostics: Vec<CandidateScore>,
    /// Rows in the synthetic design the candidates were scored on.
    pub synthetic_runs: usize,
}

impl TuneOutcome {
    /// Diagnostics as CSV: `alpha_1,...,alpha_p,score`.
    pub fn diagnostics_csv(&self) -> String {
        let p = self.alphas.len();
        let mut out = String::new();
        for l in 1..=p {
            out.push_str(&format!("alpha_{},", l));
        }
        out.push_str("score\n");
        for c in &self.diagnostics {
            for a in c.alphas.as_slice() {
                out.push_str(&format!("{},", a));
            }
            out.push_str(&format!("{}\n", c.score));
        }
        out
    }
}

/// Picks tail-mean percentages for the observed data. Deterministic
/// given the observations and `cfg.seed`; only the fitted surrogate is
/// ever evaluated, never the objective that produced `obs`.
pub fn tune_alpha(obs: &ObservationSet, cfg: &TuneConfig) -> Result<TuneOutcome> {
    if obs.n() == 0 {
        return Err(Error::EmptyData("no observations to tune on".into()));
    }
    for &a in &cfg.common_alpha_grid {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::InvalidArgument(format!(
                "grid percentage {} outside [0, 1]",
                a
            )));
        }
    }
    let profile = obs.design.profile().to_vec();
    let p = profile.len();
    let n = obs.n();

    let surrogate = heredity::fit(obs, 0, mix_seed(cfg.seed, &[1]))?;

    // Fresh scoring design, never larger than the data that paid for
    // the surrogate. Stacking independently randomized copies of the
    // smallest array uses the whole budget and refines the tail
    // resolution of each level slice.
    let cap = if cfg.synthetic_design_cap == 0 {
        n
    } else {
        cfg.synthetic_design_cap.min(n)
    };
    let design_seed = mix_seed(cfg.seed, &[2]);
    let base = smallest_oa(&OaRequest::new(profile.clone()))?;
    let synth = if base.n() <= cap {
        let fresh = randomize(&base, design_seed);
        augment(&fresh, cap / base.n(), mix_seed(design_seed, &[1]))?
    } else {
        balanced_random(&profile, cap, design_seed)?
    };
    let y_star = surrogate.evaluate_design(&synth);
    let synth_obs = ObservationSet::new(synth, y_star)?;

    let mut candidates: Vec<AlphaVector> = Vec::new();
    candidates.push(AlphaVector::uniform(0.0, p)?);
    candidates.push(AlphaVector::uniform(1.0, p)?);
    for &a in &cfg.common_alpha_grid {
        candidates.push(AlphaVector::uniform(a, p)?);
    }
    let extra = cfg.candidate_count.saturating_sub(candidates.len());
    let mut rng = rng_from_seed(mix_seed(cfg.seed, &[3]));
    for _ in 0..extra {
        let draw: Vec<f64> = (0..p).map(|_| rng.gen_range(0.0..=1.0)).collect();
        candidates.push(AlphaVector::new(draw)?);
    }

    let mut diagnostics = Vec::with_capacity(candidates.len());
    for alphas in candidates {
        let setting = predict_atm(&synth_obs, &alphas)?;
        let score = surrogate.evaluate(&setting);
        diagnostics.push(CandidateScore { alphas, score });
    }

    let mut best = 0;
    for i in 1..diagnostics.len() {
        if better(&diagnostics[i], &diagnostics[best]) {
            best = i;
        }
    }
    Ok(TuneOutcome {
        alphas: diagnostics[best].alphas.clone(),
        surrogate,
        synthetic_runs: synth_obs.n(),
        diagnostics,
    })
}

/// Strictly-better ordering for candidates: lower score, then larger
/// mean percentage (prefer the more model-driven strategy), then
/// lexicographically larger.
fn better(a: &CandidateScore, b: &CandidateScore) -> bool {
    match a.score.total_cmp(&b.score) {
        std::cmp::Ordering::Less => return true,
        std::cmp::Ordering::Greater => return false,
        std::cmp::Ordering::Equal => {}
    }
    match a.alphas.mean().total_cmp(&b.alphas.mean()) {
        std::cmp::Ordering::Greater => return true,
        std::cmp::Ordering::Less => return false,
        std::cmp::Ordering::Equal => {}
    }
    for (x, y) in a.alphas.as_slice().iter().zip(b.alphas.as_slice()) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Greater => return true,
            std::cmp::Ordering::Less => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}
