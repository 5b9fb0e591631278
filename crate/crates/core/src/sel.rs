//! Sequential elimination of levels.
//!
//! One stage lays the smallest orthogonal array over the levels still
//! alive, collects its responses, and then drops from every multi-level
//! factor the level with the worst marginal tail mean. How the tail
//! fraction is chosen is the method: `atm` retunes it from the
//! accumulated data each stage, `mean` pins plain averaging, `min` pins
//! pure minima. The session is a strict suggest -> absorb -> eliminate
//! cycle; any call out of order is a protocol error.
//!
//! All data is kept, but statistics only ever see runs whose settings
//! lie entirely inside the current surviving space: a tail mean over a
//! dead level would compete in an argmin it can no longer win, and a
//! live level's slice would be polluted by partners that no longer
//! exist. The full record still travels with the state for audit.

use crate::error::{Error, Result};
use crate::oa::{augment, randomize, smallest_oa, OaRequest};
use crate::rng::mix_seed;
use crate::space::{Design, FactorSpace, ObservationSet, Provenance, Setting};
use crate::stats::{marginal_profile, predict_atm, AlphaVector};
use crate::tuner::{tune_alpha, TuneConfig};
use serde::{Deserialize, Serialize};

/// Elimination statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelMethod {
    /// Tail fractions retuned from the accumulated data each stage.
    Atm,
    /// Plain marginal means (tail fraction 1 everywhere).
    Mean,
    /// Marginal minima (tail fraction 0 everywhere).
    Min,
}

impl std::str::FromStr for SelMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "atm" => Ok(SelMethod::Atm),
            "mean" => Ok(SelMethod::Mean),
            "min" => Ok(SelMethod::Min),
            other => Err(Error::InvalidArgument(format!(
                "unknown elimination method {:?}, expected atm, mean or min",
                other
            ))),
        }
    }
}

/// One completed stage: the batch it ran, the tail fractions the
/// elimination used, the predictor's pick right before shrinking, and
/// the original level index removed per factor (None = factor already
/// down to one level).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub design: Design,
    pub alphas: AlphaVector,
    pub prediction: Setting,
    pub eliminated: Vec<Option<usize>>,
}

/// A predictor's pick on the current data. `observed` is the smallest
/// response recorded at exactly that setting, absent when the setting
/// was never sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelPrediction {
    pub setting: Setting,
    pub observed: Option<f64>,
    /// Tail fractions the predictor ran with (tuned for
    /// [`SelMethod::Atm`], forced otherwise).
    pub alphas: AlphaVector,
}

/// Persistent state of an elimination session. Transitions return new
/// states; a value is never mutated in place.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelState {
    space: FactorSpace,
    /// Per factor, the ordered original level indices still alive.
    surviving: Vec<Vec<usize>>,
    /// Number of eliminations performed so far.
    stage: usize,
    /// Every response ever absorbed, in original level indices.
    accumulated: ObservationSet,
    /// Suggested batch whose responses have not arrived yet.
    pending: Option<Design>,
    /// Absorbed batch whose elimination has not happened yet.
    batch: Option<Design>,
    seed: u64,
    /// Per-stage design-size multipliers; the last entry repeats for
    /// all later stages.
    stage_copies: Vec<usize>,
    history: Vec<StageRecord>,
}

impl SelState {
    /// Fresh session over the full space.
    pub fn new(space: FactorSpace, seed: u64) -> Self {
        let surviving = space.profile().iter().map(|&nl| (1..=nl).collect()).collect();
        let accumulated = empty_obs(&space);
        SelState {
            space,
            surviving,
            stage: 0,
            accumulated,
            pending: None,
            batch: None,
            seed,
            stage_copies: vec![1],
            history: Vec::new(),
        }
    }

    /// Overrides the per-stage design-size multipliers. `[1]` is the
    /// plain protocol; `[2]` doubles every batch; `[1, 1, 2]` doubles
    /// from the third stage on.
    pub fn with_stage_copies(mut self, copies: Vec<usize>) -> Result<Self> {
        if copies.is_empty() || copies.contains(&0) {
            return Err(Error::InvalidArgument(
                "stage multipliers must be nonempty and positive".into(),
            ));
        }
        self.stage_copies = copies;
        Ok(self)
    }

    pub fn space(&self) -> &FactorSpace {
        &self.space
    }

    /// Ordered original level indices still alive for factor `l`.
    pub fn surviving(&self, l: usize) -> &[usize] {
        &self.surviving[l]
    }

    /// Level counts of the current surviving space.
    pub fn surviving_profile(&self) -> Vec<usize> {
        self.surviving.iter().map(|s| s.len()).collect()
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn accumulated(&self) -> &ObservationSet {
        &self.accumulated
    }

    pub fn history(&self) -> &[StageRecord] {
        &self.history
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The suggested batch still waiting for responses, if any.
    pub fn pending(&self) -> Option<&Design> {
        self.pending.as_ref()
    }

    /// True once every factor is down to a single level.
    pub fn is_resolved(&self) -> bool {
        self.surviving.iter().all(|s| s.len() == 1)
    }

    /// Lays the next batch: the smallest orthogonal array over the
    /// factors that still have a choice, freshly randomized, stretched
    /// by the stage's size multiplier, and written out in original
    /// level indices with the resolved factors pinned to their single
    /// survivor. A fully resolved space yields the one remaining
    /// setting. The returned state remembers the batch and waits for
    /// its responses.
    pub fn suggest_batch(&self) -> Result<(SelState, Design)> {
        if self.pending.is_some() {
            return Err(Error::Protocol(
                "a suggested batch is already awaiting observations".into(),
            ));
        }
        if self.batch.is_some() {
            return Err(Error::Protocol(
                "the absorbed batch awaits elimination".into(),
            ));
        }
        let design = if self.is_resolved() {
            let levels: Vec<usize> = self.surviving.iter().map(|s| s[0]).collect();
            Design::new(
                self.space.profile(),
                vec![levels],
                Provenance::External,
                format!("resolved@stage{}", self.stage),
            )?
        } else {
            let open: Vec<usize> = (0..self.surviving.len())
                .filter(|&l| self.surviving[l].len() > 1)
                .collect();
            let sub_profile: Vec<usize> =
                open.iter().map(|&l| self.surviving[l].len()).collect();
            let base = smallest_oa(&OaRequest::new(sub_profile))?;
            let stage_seed = mix_seed(self.seed, &[0x5E1, self.stage as u64]);
            let fresh = randomize(&base, stage_seed);
            let copies = self.copies_for(self.stage);
            let full = augment(&fresh, copies, mix_seed(stage_seed, &[1]))?;
            let runs = full
                .runs()
                .iter()
                .map(|row| {
                    let mut levels: Vec<usize> =
                        self.surviving.iter().map(|s| s[0]).collect();
                    for (j, &l) in open.iter().enumerate() {
                        levels[l] = self.surviving[l][row[j] - 1];
                    }
                    levels
                })
                .collect();
            Design::new(self.space.profile(), runs, full.provenance, full.construction.clone())?
        };
        let mut next = self.clone();
        next.pending = Some(design.clone());
        Ok((next, design))
    }

    /// Ingests the responses for the pending batch, in its row order.
    pub fn absorb(&self, y: &[f64]) -> Result<SelState> {
        let pending = self.pending.as_ref().ok_or_else(|| {
            Error::Protocol("no suggested batch to absorb responses for".into())
        })?;
        if y.len() != pending.n() {
            return Err(Error::InvalidArgument(format!(
                "{} responses for a {}-run batch",
                y.len(),
                pending.n()
            )));
        }
        let batch_obs = ObservationSet::new(pending.clone(), y.to_vec())?;
        let mut next = self.clone();
        next.accumulated = concat_obs(&self.space, &self.accumulated, &batch_obs)?;
        next.batch = Some(pending.clone());
        next.pending = None;
        Ok(next)
    }

    /// Drops from every multi-level factor the surviving level with the
    /// largest marginal tail mean, ties removing the highest original
    /// level index. The tail fractions come from the method; `atm`
    /// retunes them on the surviving-space data with `cfg` (its seed is
    /// remixed per stage so repeated stages explore fresh candidate
    /// draws). Records the stage and advances the counter.
    pub fn eliminate(&self, method: SelMethod, cfg: &TuneConfig) -> Result<SelState> {
        let batch = self.batch.as_ref().ok_or_else(|| {
            Error::Protocol("eliminate needs a freshly absorbed batch".into())
        })?;
        let restricted = self.restricted()?;
        let alphas = self.method_alphas(method, &restricted, cfg)?;
        let prediction = self.to_original_setting(&predict_atm(&restricted, &alphas)?);

        let profile = marginal_profile(&restricted, &alphas)?;
        let mut surviving = self.surviving.clone();
        let mut eliminated = Vec::with_capacity(surviving.len());
        for (l, alive) in self.surviving.iter().enumerate() {
            if alive.len() < 2 {
                eliminated.push(None);
                continue;
            }
            let mut worst: Option<(usize, f64)> = None;
            for row in profile.factor(l) {
                // every surviving level occurs in the latest balanced
                // batch, so the slice is never empty
                let s = row.stat.expect("surviving level with no observations");
                let replace = match worst {
                    None => true,
                    Some((lv, ws)) => s > ws || (s == ws && row.level > lv),
                };
                if replace {
                    worst = Some((row.level, s));
                }
            }
            let (level, _) = worst.expect("multi-level factor with no marginal rows");
            let original = alive[level - 1];
            surviving[l].retain(|&v| v != original);
            eliminated.push(Some(original));
        }

        let mut next = self.clone();
        next.surviving = surviving;
        next.stage += 1;
        next.batch = None;
        next.history.push(StageRecord {
            design: batch.clone(),
            alphas,
            prediction,
            eliminated,
        });
        Ok(next)
    }

    /// The method's predictor on the surviving-space data, in original
    /// level indices. Read-only; allowed in any phase once data exists.
    pub fn predict(&self, method: SelMethod, cfg: &TuneConfig) -> Result<SelPrediction> {
        let restricted = self.restricted()?;
        let alphas = self.method_alphas(method, &restricted, cfg)?;
        let setting = self.to_original_setting(&predict_atm(&restricted, &alphas)?);
        let observed = self
            .accumulated
            .design
            .runs()
            .iter()
            .zip(&self.accumulated.y)
            .filter(|(run, _)| run.as_slice() == setting.levels.as_slice())
            .map(|(_, &v)| v)
            .min_by(f64::total_cmp);
        Ok(SelPrediction { setting, observed, alphas })
    }

    /// Serializes the whole session to pretty JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("session state always serializes")
    }

    /// Restores a session from JSON, re-checking the state invariants.
    pub fn from_json(text: &str) -> Result<SelState> {
        let state: SelState = serde_json::from_str(text)
            .map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
        state.validate()?;
        Ok(state)
    }

    /// Structural invariants a state file must satisfy.
    fn validate(&self) -> Result<()> {
        let profile = self.space.profile();
        if self.surviving.len() != profile.len() {
            return Err(Error::Protocol(format!(
                "{} surviving-level lists for {} factors",
                self.surviving.len(),
                profile.len()
            )));
        }
        for (l, alive) in self.surviving.iter().enumerate() {
            let ok = !alive.is_empty()
                && alive.windows(2).all(|w| w[0] < w[1])
                && *alive.last().unwrap() <= profile[l];
            if !ok {
                return Err(Error::Protocol(format!(
                    "surviving levels of factor {} are not an ordered subset of 1..={}",
                    l + 1,
                    profile[l]
                )));
            }
        }
        if self.pending.is_some() && self.batch.is_some() {
            return Err(Error::Protocol(
                "state has both a pending and an absorbed batch".into(),
            ));
        }
        for d in self.pending.iter().chain(self.batch.iter()) {
            if d.profile() != profile {
                return Err(Error::Protocol("batch profile differs from the space".into()));
            }
        }
        if self.accumulated.design.profile() != profile {
            return Err(Error::Protocol(
                "accumulated data profile differs from the space".into(),
            ));
        }
        if self.history.len() != self.stage {
            return Err(Error::Protocol(format!(
                "{} stage records for stage counter {}",
                self.history.len(),
                self.stage
            )));
        }
        if self.stage_copies.is_empty() || self.stage_copies.contains(&0) {
            return Err(Error::Protocol("bad stage multipliers".into()));
        }
        Ok(())
    }

    fn copies_for(&self, stage: usize) -> usize {
        *self
            .stage_copies
            .get(stage)
            .unwrap_or_else(|| self.stage_copies.last().expect("nonempty multipliers"))
    }

    /// Accumulated runs that live entirely inside the surviving space,
    /// recoded so factor `l`'s levels are 1..=surviving count.
    fn restricted(&self) -> Result<ObservationSet> {
        if self.accumulated.n() == 0 {
            return Err(Error::EmptyData("session has no observations yet".into()));
        }
        let mut runs = Vec::new();
        let mut y = Vec::new();
        'run: for (row, &v) in self.accumulated.design.runs().iter().zip(&self.accumulated.y) {
            let mut recoded = Vec::with_capacity(row.len());
            for (l, &lv) in row.iter().enumerate() {
                match self.surviving[l].iter().position(|&s| s == lv) {
                    Some(pos) => recoded.push(pos + 1),
                    None => continue 'run,
                }
            }
            runs.push(recoded);
            y.push(v);
        }
        if runs.is_empty() {
            return Err(Error::EmptyData(
                "no accumulated runs inside the surviving space".into(),
            ));
        }
        let design = Design::new(
            self.surviving_profile(),
            runs,
            Provenance::External,
            "surviving-slice",
        )?;
        ObservationSet::new(design, y)
    }

    fn method_alphas(
        &self,
        method: SelMethod,
        restricted: &ObservationSet,
        cfg: &TuneConfig,
    ) -> Result<AlphaVector> {
        let p = restricted.p();
        match method {
            SelMethod::Mean => AlphaVector::uniform(1.0, p),
            SelMethod::Min => AlphaVector::uniform(0.0, p),
            SelMethod::Atm => {
                // the tuner models only factors that still have a
                // choice; resolved ones are constant columns and get a
                // placeholder of 1 (any value picks their lone level)
                let profile = restricted.design.profile();
                let open: Vec<usize> = (0..p).filter(|&l| profile[l] > 1).collect();
                if open.is_empty() {
                    return AlphaVector::uniform(1.0, p);
                }
                let staged = TuneConfig {
                    seed: mix_seed(cfg.seed, &[0xA1FA, self.stage as u64]),
                    ..cfg.clone()
                };
                let tuned = if open.len() == p {
                    tune_alpha(restricted, &staged)?.alphas
                } else {
                    tune_alpha(&project_columns(restricted, &open)?, &staged)?.alphas
                };
                let mut alphas = vec![1.0; p];
                for (j, &l) in open.iter().enumerate() {
                    alphas[l] = tuned.get(j);
                }
                AlphaVector::new(alphas)
            }
        }
    }

    fn to_original_setting(&self, s: &Setting) -> Setting {
        Setting::new(
            s.levels
                .iter()
                .enumerate()
                .map(|(l, &lv)| self.surviving[l][lv - 1])
                .collect(),
        )
    }
}

fn empty_obs(space: &FactorSpace) -> ObservationSet {
    let design = Design::new(space.profile(), Vec::new(), Provenance::External, "session")
        .expect("empty design over a valid space");
    ObservationSet::new(design, Vec::new()).expect("empty observation set")
}

/// Restriction of an observation set to a subset of its factors.
fn project_columns(obs: &ObservationSet, keep: &[usize]) -> Result<ObservationSet> {
    let profile: Vec<usize> = keep.iter().map(|&l| obs.design.profile()[l]).collect();
    let runs: Vec<Vec<usize>> = obs
        .design
        .runs()
        .iter()
        .map(|r| keep.iter().map(|&l| r[l]).collect())
        .collect();
    let design = Design::new(profile, runs, Provenance::External, "open-factors")?;
    ObservationSet::new(design, obs.y.clone())
}

/// Concatenation that keeps the accumulated record's construction tag
/// flat instead of nesting one stack() wrapper per stage.
fn concat_obs(
    space: &FactorSpace,
    a: &ObservationSet,
    b: &ObservationSet,
) -> Result<ObservationSet> {
    let mut runs = a.design.runs().to_vec();
    runs.extend(b.design.runs().iter().cloned());
    let mut y = a.y.clone();
    y.extend_from_slice(&b.y);
    let design = Design::new(space.profile(), runs, Provenance::External, "session")?;
    ObservationSet::new(design, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testbed;

    fn full_grid_state(profile: &[usize], f: impl Fn(&[usize]) -> f64) -> SelState {
        // absorb a hand-built full factorial through the protocol by
        // replacing the suggested batch's responses with f at its runs
        let space = FactorSpace::from_profile(profile).unwrap();
        let state = SelState::new(space, 7);
        let (state, d) = state.suggest_batch().unwrap();
        let y: Vec<f64> = d.runs().iter().map(|r| f(r)).collect();
        state.absorb(&y).unwrap()
    }

    #[test]
    fn protocol_rejects_out_of_order_calls() {
        let space = FactorSpace::from_profile(&[3, 3, 3, 3]).unwrap();
        let s0 = SelState::new(space, 1);
        assert!(matches!(s0.absorb(&[1.0]), Err(Error::Protocol(_))));
        assert!(matches!(
            s0.eliminate(SelMethod::Mean, &TuneConfig::default()),
            Err(Error::Protocol(_))
        ));

        let (s1, d) = s0.suggest_batch().unwrap();
        assert!(matches!(s1.suggest_batch(), Err(Error::Protocol(_))));
        assert!(matches!(
            s1.eliminate(SelMethod::Mean, &TuneConfig::default()),
            Err(Error::Protocol(_))
        ));

        let s2 = s1.absorb(&vec![0.0; d.n()]).unwrap();
        assert!(matches!(s2.absorb(&vec![0.0; d.n()]), Err(Error::Protocol(_))));
        assert!(matches!(s2.suggest_batch(), Err(Error::Protocol(_))));

        let s3 = s2.eliminate(SelMethod::Mean, &TuneConfig::default()).unwrap();
        assert!(s3.suggest_batch().is_ok());
    }

    #[test]
    fn absorb_checks_the_response_count() {
        let space = FactorSpace::from_profile(&[3, 3, 3, 3]).unwrap();
        let (s, d) = SelState::new(space, 1).suggest_batch().unwrap();
        assert_eq!(d.n(), 9);
        assert!(matches!(s.absorb(&[1.0, 2.0]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn stage_sizes_match_the_catalog_ladder() {
        // 4^9 shrinks 32 -> 27 -> 12 across the first three stages
        let space = FactorSpace::from_profile(&[4; 9]).unwrap();
        let mut state = SelState::new(space, 3);
        let mut sizes = Vec::new();
        for _ in 0..3 {
            let (s, d) = state.suggest_batch().unwrap();
            sizes.push(d.n());
            let y: Vec<f64> = d.runs().iter().map(|r| r.iter().sum::<usize>() as f64).collect();
            let s = s.absorb(&y).unwrap();
            state = s.eliminate(SelMethod::Mean, &TuneConfig::default()).unwrap();
        }
        assert_eq!(sizes, vec![32, 27, 12]);
        assert_eq!(sizes.iter().sum::<usize>(), 71);
        assert_eq!(state.stage(), 3);
        assert_eq!(state.surviving_profile(), vec![1; 9]);
    }

    #[test]
    fn mean_elimination_matches_hand_marginals() {
        // 2x2 grid with f = (1, 2, 3, 4): factor 1 means (1.5, 3.5),
        // factor 2 means (2, 3); level 2 goes on both factors
        let f = |r: &[usize]| ((r[0] - 1) * 2 + r[1]) as f64;
        let state = full_grid_state(&[2, 2], f);
        let next = state.eliminate(SelMethod::Mean, &TuneConfig::default()).unwrap();
        assert_eq!(next.surviving(0), &[1]);
        assert_eq!(next.surviving(1), &[1]);
        let rec = &next.history()[0];
        assert_eq!(rec.eliminated, vec![Some(2), Some(2)]);
        assert_eq!(rec.prediction.levels, vec![1, 1]);
    }

    #[test]
    fn min_elimination_matches_hand_minima() {
        // same grid: factor 1 minima (1, 3), factor 2 minima (1, 2)
        let f = |r: &[usize]| ((r[0] - 1) * 2 + r[1]) as f64;
        let state = full_grid_state(&[2, 2], f);
        let next = state.eliminate(SelMethod::Min, &TuneConfig::default()).unwrap();
        assert_eq!(next.history()[0].eliminated, vec![Some(2), Some(2)]);
    }

    #[test]
    fn elimination_ties_remove_the_highest_level() {
        // constant response: every level ties, the last one must go
        let state = full_grid_state(&[3, 4], |_| 5.0);
        let next = state.eliminate(SelMethod::Mean, &TuneConfig::default()).unwrap();
        assert_eq!(next.history()[0].eliminated, vec![Some(3), Some(4)]);
        assert_eq!(next.surviving(0), &[1, 2]);
        assert_eq!(next.surviving(1), &[1, 2, 3]);
    }

    #[test]
    fn single_level_factors_are_skipped() {
        // a 2-level factor is exhausted after one elimination and must
        // be pinned, not eliminated from, while the other keeps going
        let f = |r: &[usize]| (10 * r[0] + r[1]) as f64;
        let state = full_grid_state(&[2, 4], f);
        let s1 = state.eliminate(SelMethod::Mean, &TuneConfig::default()).unwrap();
        assert_eq!(s1.history()[0].eliminated, vec![Some(2), Some(4)]);
        assert_eq!(s1.surviving_profile(), vec![1, 3]);
        let (s2, d) = s1.suggest_batch().unwrap();
        assert!(d.runs().iter().all(|r| r[0] == 1));
        let y: Vec<f64> = d.runs().iter().map(|r| f(r)).collect();
        let s2 = s2.absorb(&y).unwrap();
        let s3 = s2.eliminate(SelMethod::Mean, &TuneConfig::default()).unwrap();
        assert_eq!(s3.history()[1].eliminated, vec![None, Some(3)]);
        assert_eq!(s3.surviving_profile(), vec![1, 2]);
    }

    #[test]
    fn dead_level_runs_leave_later_statistics() {
        // factor 1 level 3 is catastrophic and gets eliminated first;
        // afterwards the marginal means of the other factor must be
        // computed as if those runs never happened
        let f = |r: &[usize]| if r[0] == 3 { 100.0 } else { (10 * r[0] + r[1]) as f64 };
        let state = full_grid_state(&[3, 3], f);
        let s1 = state.eliminate(SelMethod::Mean, &TuneConfig::default()).unwrap();
        assert_eq!(s1.history()[0].eliminated, vec![Some(3), Some(3)]);
        let restricted = s1.restricted().unwrap();
        assert_eq!(restricted.design.profile(), &[2, 2]);
        assert_eq!(restricted.n(), 4);
        assert!(restricted.y.iter().all(|&v| v < 100.0));
    }

    #[test]
    fn eliminated_levels_never_return() {
        let obj = testbed::random_additive(&[4, 4, 4], 11).unwrap();
        let mut state = SelState::new(FactorSpace::from_profile(&[4, 4, 4]).unwrap(), 11);
        let mut prev: Vec<Vec<usize>> =
            (0..3).map(|l| state.surviving(l).to_vec()).collect();
        for _ in 0..3 {
            let (s, d) = state.suggest_batch().unwrap();
            let y: Vec<f64> =
                d.runs().iter().map(|r| obj.noiseless(&Setting::new(r.clone())).unwrap()).collect();
            let s = s.absorb(&y).unwrap();
            state = s.eliminate(SelMethod::Min, &TuneConfig::default()).unwrap();
            for l in 0..3 {
                let now = state.surviving(l);
                assert!(now.iter().all(|v| prev[l].contains(v)), "level resurrected");
                assert_eq!(now.len(), prev[l].len() - 1);
            }
            prev = (0..3).map(|l| state.surviving(l).to_vec()).collect();
        }
    }

    #[test]
    fn batches_stay_inside_the_surviving_space() {
        let obj = testbed::random_additive(&[4, 3, 5], 4).unwrap();
        let mut state = SelState::new(FactorSpace::from_profile(&[4, 3, 5]).unwrap(), 9);
        for _ in 0..2 {
            let (s, d) = state.suggest_batch().unwrap();
            for row in d.runs() {
                for (l, &lv) in row.iter().enumerate() {
                    assert!(s.surviving(l).contains(&lv));
                }
            }
            let y: Vec<f64> =
                d.runs().iter().map(|r| obj.noiseless(&Setting::new(r.clone())).unwrap()).collect();
            let s = s.absorb(&y).unwrap();
            state = s.eliminate(SelMethod::Mean, &TuneConfig::default()).unwrap();
        }
        // each surviving level of each factor appears in the next batch
        let (_, d) = state.suggest_batch().unwrap();
        for l in 0..3 {
            for &lv in state.surviving(l) {
                assert!(d.runs().iter().any(|r| r[l] == lv));
            }
        }
    }

    #[test]
    fn resolved_space_suggests_the_single_survivor() {
        let f = |r: &[usize]| (r[0] + r[1]) as f64;
        let state = full_grid_state(&[2, 2], f);
        let state = state.eliminate(SelMethod::Mean, &TuneConfig::default()).unwrap();
        assert!(state.is_resolved());
        let (_, d) = state.suggest_batch().unwrap();
        assert_eq!(d.n(), 1);
        assert_eq!(d.runs()[0], vec![1, 1]);
    }

    #[test]
    fn predict_reports_the_observed_response_when_sampled() {
        let f = |r: &[usize]| (r[0] * 10 + r[1]) as f64;
        let state = full_grid_state(&[3, 3], f);
        let pred = state.predict(SelMethod::Min, &TuneConfig::default()).unwrap();
        assert_eq!(pred.setting.levels, vec![1, 1]);
        assert_eq!(pred.observed, Some(11.0));
        // with plain means on an additive table the pick agrees
        let pred = state.predict(SelMethod::Mean, &TuneConfig::default()).unwrap();
        assert_eq!(pred.setting.levels, vec![1, 1]);
    }

    #[test]
    fn predict_before_any_data_is_an_error() {
        let space = FactorSpace::from_profile(&[3, 3]).unwrap();
        let state = SelState::new(space, 0);
        assert!(state.predict(SelMethod::Mean, &TuneConfig::default()).is_err());
    }

    #[test]
    fn atm_elimination_with_tuned_ones_matches_mean() {
        // additive data tunes to all-ones, so atm and mean must agree
        let obj = testbed::random_additive(&[4, 4, 4, 4], 3).unwrap();
        let space = FactorSpace::from_profile(&[4, 4, 4, 4]).unwrap();
        let (s, d) = SelState::new(space, 5).suggest_batch().unwrap();
        let y: Vec<f64> =
            d.runs().iter().map(|r| obj.noiseless(&Setting::new(r.clone())).unwrap()).collect();
        let s = s.absorb(&y).unwrap();
        let cfg = TuneConfig::with_seed(40);
        let via_atm = s.eliminate(SelMethod::Atm, &cfg).unwrap();
        let via_mean = s.eliminate(SelMethod::Mean, &cfg).unwrap();
        assert_eq!(via_atm.history()[0].alphas.as_slice(), &[1.0; 4]);
        assert_eq!(
            via_atm.history()[0].eliminated,
            via_mean.history()[0].eliminated
        );
        assert_eq!(via_atm.surviving_profile(), via_mean.surviving_profile());
    }

    #[test]
    fn same_seed_same_trajectory() {
        let obj = testbed::random_additive(&[4, 4, 4], 17).unwrap();
        let run = || {
            let space = FactorSpace::from_profile(&[4, 4, 4]).unwrap();
            let mut state = SelState::new(space, 23);
            for _ in 0..2 {
                let (s, d) = state.suggest_batch().unwrap();
                let y: Vec<f64> = d
                    .runs()
                    .iter()
                    .map(|r| obj.noiseless(&Setting::new(r.clone())).unwrap())
                    .collect();
                let s = s.absorb(&y).unwrap();
                state = s.eliminate(SelMethod::Atm, &TuneConfig::with_seed(2)).unwrap();
            }
            state
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn stages_draw_different_randomizations() {
        let space = FactorSpace::from_profile(&[3; 4]).unwrap();
        let mut state = SelState::new(space, 8);
        let (s, d0) = state.suggest_batch().unwrap();
        let s = s.absorb(&vec![1.0; d0.n()]).unwrap();
        state = s.eliminate(SelMethod::Mean, &TuneConfig::default()).unwrap();
        let (_, d1) = state.suggest_batch().unwrap();
        // same 9-run lattice both times (3 surviving levels after one
        // elimination of a 3-level factor would be 2: sizes differ), so
        // just check the stage-0 draw is seed-dependent instead
        let other = SelState::new(FactorSpace::from_profile(&[3; 4]).unwrap(), 9);
        let (_, e0) = other.suggest_batch().unwrap();
        assert_ne!(d0.runs(), e0.runs());
        assert_ne!(d0.runs(), d1.runs());
    }

    #[test]
    fn stage_copies_stretch_the_batches() {
        let space = FactorSpace::from_profile(&[3; 4]).unwrap();
        let state = SelState::new(space, 2).with_stage_copies(vec![2, 1]).unwrap();
        let (s, d) = state.suggest_batch().unwrap();
        assert_eq!(d.n(), 18);
        let s = s.absorb(&vec![0.0; 18]).unwrap();
        let s = s.eliminate(SelMethod::Mean, &TuneConfig::default()).unwrap();
        let (_, d) = s.suggest_batch().unwrap();
        assert_eq!(d.n(), 8);
        // a single entry repeats for every later stage
        let doubled = SelState::new(FactorSpace::from_profile(&[3; 4]).unwrap(), 2)
            .with_stage_copies(vec![2])
            .unwrap();
        let (s, d) = doubled.suggest_batch().unwrap();
        let s = s.absorb(&vec![0.0; d.n()]).unwrap();
        let s = s.eliminate(SelMethod::Mean, &TuneConfig::default()).unwrap();
        let (_, d) = s.suggest_batch().unwrap();
        assert_eq!(d.n(), 16);
    }

    #[test]
    fn json_round_trip_preserves_the_session() {
        let obj = testbed::random_additive(&[4, 4], 6).unwrap();
        let space = FactorSpace::from_profile(&[4, 4]).unwrap();
        let (s, d) = SelState::new(space, 13).suggest_batch().unwrap();
        let y: Vec<f64> =
            d.runs().iter().map(|r| obj.noiseless(&Setting::new(r.clone())).unwrap()).collect();
        let s = s.absorb(&y).unwrap();
        let s = s.eliminate(SelMethod::Min, &TuneConfig::default()).unwrap();
        let back = SelState::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        // restored state keeps working
        let (_, d) = back.suggest_batch().unwrap();
        assert_eq!(d.profile(), &[4, 4]);
    }

    #[test]
    fn corrupt_state_files_are_rejected() {
        let space = FactorSpace::from_profile(&[3, 3]).unwrap();
        let state = SelState::new(space, 0);
        let good = state.to_json();
        let bad = good.replace("\"stage\": 0", "\"stage\": 2");
        assert!(matches!(SelState::from_json(&bad), Err(Error::Protocol(_))));
        assert!(SelState::from_json("not json").is_err());
    }
}
