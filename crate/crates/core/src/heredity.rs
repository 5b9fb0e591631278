//! Sparse second-order surrogate with weak effect heredity.
//!
//! The model is an intercept plus per-factor level effects plus
//! per-factor-pair level-pair effects. It is fitted by a two-stage L1
//! pipeline: stage 1 runs a lasso on main-effect columns alone; stage
//! 2 refits a joint lasso over the surviving factors' main effects
//! plus level-pair columns for every factor pair with at least one
//! surviving parent, which is what keeps heredity weak rather than
//! strong. One penalty weight is shared by both stages and picked by
//! cross-validating the whole pipeline over a 50-point log grid from
//! the smallest all-zeroing penalty down to 1e-4 of it.
//!
//! Reported coefficients are canonical: level effects sum to zero
//! within each factor, and each interaction block is doubly centered
//! with the absorbed margins folded into the main effects and
//! intercept. The rewrite never changes predictions.
//!
//! Fitting is a function of the multiset of observations: rows are
//! sorted internally, so row order cannot change the result.

use crate::error::{Error, Result};
use crate::rng::{mix_seed, rng_from_seed};
use crate::space::{Design, ObservationSet, Setting};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Folds used when the caller does not care; n < 15 switches to
/// leave-one-out regardless.
pub const DEFAULT_CV_FOLDS: usize = 5;

const MAX_SWEEPS: usize = 10_000;
const COEF_TOL: f64 = 1e-7;
const GRID_POINTS: usize = 50;
const ACTIVE_TOL: f64 = 1e-12;

/// Level-pair effects for one factor pair, doubly centered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionBlock {
    /// 0-based factor pair, first < second.
    pub factors: (usize, usize),
    /// coef[a-1][b-1] for levels (a, b); rows and columns sum to zero.
    pub coef: Vec<Vec<f64>>,
}

/// Fitted second-order surrogate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateModel {
    pub profile: Vec<usize>,
    pub intercept: f64,
    /// main_effects[l][j-1]; sums to zero within each factor.
    pub main_effects: Vec<Vec<f64>>,
    pub interactions: Vec<InteractionBlock>,
    /// Factors carrying signal: nonzero main effects, or a parent of
    /// an active interaction.
    pub active_mains: Vec<usize>,
    pub active_pairs: Vec<(usize, usize)>,
    /// Shared penalty weight the pipeline was fitted at.
    pub lambda: f64,
    /// Mean cross-validated squared prediction error at `lambda`; 0
    /// when no cross-validation took place.
    pub cv_error: f64,
}

impl SurrogateModel {
    /// Linear predictor at a setting (levels must fit the profile).
    pub fn evaluate(&self, s: &Setting) -> f64 {
        let mut v = self.intercept;
        for (l, &lv) in s.levels.iter().enumerate() {
            v += self.main_effects[l][lv - 1];
        }
        for b in &self.interactions {
            let (f1, f2) = b.factors;
            v += b.coef[s.levels[f1] - 1][s.levels[f2] - 1];
        }
        v
    }

    pub fn evaluate_design(&self, d: &Design) -> Vec<f64> {
        (0..d.n()).map(|i| self.evaluate(&d.setting(i))).collect()
    }

    pub fn is_intercept_only(&self) -> bool {
        self.active_mains.is_empty() && self.active_pairs.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }
}

/// Total absolute interaction mass relative to main-effect mass.
pub fn interaction_strength(m: &SurrogateModel) -> f64 {
    let inter: f64 = m
        .interactions
        .iter()
        .map(|b| b.coef.iter().flatten().map(|c| c.abs()).sum::<f64>())
        .sum();
    let main: f64 = m.main_effects.iter().flatten().map(|c| c.abs()).sum();
    inter / (main + 1e-12)
}

/// Identity of one design-matrix column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum ColKind {
    Main { factor: usize, level: usize },
    Inter { f1: usize, f2: usize, l1: usize, l2: usize },
}

/// A centered indicator column. Columns are deliberately not rescaled
/// to unit norm: with indicators the penalty then weighs each effect by
/// how often its cell was actually observed, so a level seen eight
/// times beats a level pair seen twice instead of competing at par.
struct Column {
    kind: ColKind,
    values: Vec<f64>,
    mean: f64,
    /// Squared norm of `values`.
    sq: f64,
}

fn make_column(kind: ColKind, indicator: Vec<f64>) -> Option<Column> {
    let n = indicator.len() as f64;
    let mean = indicator.iter().sum::<f64>() / n;
    let values: Vec<f64> = indicator.iter().map(|v| v - mean).collect();
    let sq = values.iter().map(|v| v * v).sum::<f64>();
    if sq < 1e-12 {
        return None;
    }
    Some(Column { kind, values, mean, sq })
}

fn main_columns(runs: &[Vec<usize>], profile: &[usize]) -> Vec<Column> {
    let mut cols = Vec::new();
    for (l, &nl) in profile.iter().enumerate() {
        for level in 1..=nl {
            let ind: Vec<f64> =
                runs.iter().map(|r| (r[l] == level) as u8 as f64).collect();
            if let Some(c) = make_column(ColKind::Main { factor: l, level }, ind) {
                cols.push(c);
            }
        }
    }
    cols
}

fn interaction_columns(
    runs: &[Vec<usize>],
    profile: &[usize],
    pairs: &[(usize, usize)],
) -> Vec<Column> {
    let mut cols = Vec::new();
    for &(f1, f2) in pairs {
        for l1 in 1..=profile[f1] {
            for l2 in 1..=profile[f2] {
                let ind: Vec<f64> = runs
                    .iter()
                    .map(|r| (r[f1] == l1 && r[f2] == l2) as u8 as f64)
                    .collect();
                if let Some(c) = make_column(ColKind::Inter { f1, f2, l1, l2 }, ind) {
                    cols.push(c);
                }
            }
        }
    }
    cols
}

/// Cyclic coordinate descent with soft thresholding on centered
/// columns. `beta` carries a warm start in and the solution out; the
/// intercept is the response mean and is not penalized.
fn lasso_cd(cols: &[Column], y_centered: &[f64], lambda: f64, beta: &mut [f64]) {
    let n = y_centered.len();
    let mut r = y_centered.to_vec();
    for (j, c) in cols.iter().enumerate() {
        if beta[j] != 0.0 {
            for i in 0..n {
                r[i] -= beta[j] * c.values[i];
            }
        }
    }
    for _ in 0..MAX_SWEEPS {
        let mut max_delta = 0.0f64;
        for (j, c) in cols.iter().enumerate() {
            let mut dot = 0.0;
            for i in 0..n {
                dot += c.values[i] * r[i];
            }
            let z = dot + c.sq * beta[j];
            let new = z.signum() * (z.abs() - lambda).max(0.0) / c.sq;
            let delta = new - beta[j];
            if delta != 0.0 {
                for i in 0..n {
                    r[i] -= delta * c.values[i];
                }
                beta[j] = new;
                max_delta = max_delta.max(delta.abs());
            }
        }
        if max_delta < COEF_TOL {
            break;
        }
    }
}

/// Pipeline output in original coding, before canonicalization.
struct RawFit {
    profile: Vec<usize>,
    intercept: f64,
    mains: Vec<Vec<f64>>,
    inters: BTreeMap<(usize, usize), Vec<Vec<f64>>>,
}

impl RawFit {
    fn eval(&self, levels: &[usize]) -> f64 {
        let mut v = self.intercept;
        for (l, &lv) in levels.iter().enumerate() {
            v += self.mains[l][lv - 1];
        }
        for ((f1, f2), block) in &self.inters {
            v += block[levels[*f1] - 1][levels[*f2] - 1];
        }
        v
    }
}

/// Runs both stages at one penalty weight. `warm` carries coefficients
/// between penalties on the same data (keyed by column identity).
fn fit_pipeline(
    runs: &[Vec<usize>],
    y: &[f64],
    profile: &[usize],
    lambda: f64,
    warm: &mut HashMap<ColKind, f64>,
) -> RawFit {
    let n = y.len();
    let ybar = y.iter().sum::<f64>() / n as f64;
    let yc: Vec<f64> = y.iter().map(|v| v - ybar).collect();
    let p = profile.len();

    let stage1 = main_columns(runs, profile);
    let mut b1: Vec<f64> = stage1.iter().map(|c| *warm.get(&c.kind).unwrap_or(&0.0)).collect();
    lasso_cd(&stage1, &yc, lambda, &mut b1);
    let mut survivors = BTreeSet::new();
    for (c, &b) in stage1.iter().zip(&b1) {
        if b != 0.0 {
            if let ColKind::Main { factor, .. } = c.kind {
                survivors.insert(factor);
            }
        }
    }

    let pairs: Vec<(usize, usize)> = (0..p)
        .flat_map(|a| ((a + 1)..p).map(move |b| (a, b)))
        .filter(|(a, b)| survivors.contains(a) || survivors.contains(b))
        .collect();
    let mut stage2: Vec<Column> = stage1
        .into_iter()
        .filter(|c| match c.kind {
            ColKind::Main { factor, .. } => survivors.contains(&factor),
            ColKind::Inter { .. } => unreachable!(),
        })
        .collect();
    stage2.extend(interaction_columns(runs, profile, &pairs));
    let mut b2: Vec<f64> = stage2.iter().map(|c| *warm.get(&c.kind).unwrap_or(&0.0)).collect();
    lasso_cd(&stage2, &yc, lambda, &mut b2);

    warm.clear();
    let mut fit = RawFit {
        profile: profile.to_vec(),
        intercept: ybar,
        mains: profile.iter().map(|&nl| vec![0.0; nl]).collect(),
        inters: BTreeMap::new(),
    };
    for (c, &b) in stage2.iter().zip(&b2) {
        if b == 0.0 {
            continue;
        }
        warm.insert(c.kind, b);
        let effect = b;
        fit.intercept -= effect * c.mean;
        match c.kind {
            ColKind::Main { factor, level } => fit.mains[factor][level - 1] += effect,
            ColKind::Inter { f1, f2, l1, l2 } => {
                fit.inters
                    .entry((f1, f2))
                    .or_insert_with(|| vec![vec![0.0; profile[f2]]; profile[f1]])
                    [l1 - 1][l2 - 1] += effect;
            }
        }
    }
    fit
}

/// Moves interaction margins into mains and main means into the
/// intercept; predictions are unchanged.
fn canonicalize(mut raw: RawFit, lambda: f64, cv_error: f64) -> SurrogateModel {
    let mut interactions = Vec::new();
    let mut active_pairs = Vec::new();
    for ((f1, f2), mut block) in std::mem::take(&mut raw.inters) {
        let rows = block.len();
        let cols = block[0].len();
        let row_mean: Vec<f64> =
            block.iter().map(|r| r.iter().sum::<f64>() / cols as f64).collect();
        let col_mean: Vec<f64> = (0..cols)
            .map(|b| block.iter().map(|r| r[b]).sum::<f64>() / rows as f64)
            .collect();
        let grand = row_mean.iter().sum::<f64>() / rows as f64;
        for a in 0..rows {
            for b in 0..cols {
                block[a][b] -= row_mean[a] + col_mean[b] - grand;
            }
        }
        for a in 0..rows {
            raw.mains[f1][a] += row_mean[a] - grand;
        }
        for b in 0..cols {
            raw.mains[f2][b] += col_mean[b] - grand;
        }
        raw.intercept += grand;
        if block.iter().flatten().any(|c| c.abs() > ACTIVE_TOL) {
            active_pairs.push((f1, f2));
            interactions.push(InteractionBlock { factors: (f1, f2), coef: block });
        }
    }
    let mut active_mains = BTreeSet::new();
    for (l, main) in raw.mains.iter_mut().enumerate() {
        let mean = main.iter().sum::<f64>() / main.len() as f64;
        for v in main.iter_mut() {
            *v -= mean;
        }
        raw.intercept += mean;
        if main.iter().any(|c| c.abs() > ACTIVE_TOL) {
            active_mains.insert(l);
        }
    }
    for &(f1, f2) in &active_pairs {
        active_mains.insert(f1);
        active_mains.insert(f2);
    }
    SurrogateModel {
        profile: raw.profile,
        intercept: raw.intercept,
        main_effects: raw.mains,
        interactions,
        active_mains: active_mains.into_iter().collect(),
        active_pairs,
        lambda,
        cv_error,
    }
}

/// Penalty weight that zeroes every main effect (and with it the whole
/// pipeline, since stage 2 needs stage-1 survivors).
fn lambda_max(runs: &[Vec<usize>], y: &[f64], profile: &[usize]) -> f64 {
    let ybar = y.iter().sum::<f64>() / y.len() as f64;
    let yc: Vec<f64> = y.iter().map(|v| v - ybar).collect();
    main_columns(runs, profile)
        .iter()
        .map(|c| c.values.iter().zip(&yc).map(|(a, b)| a * b).sum::<f64>().abs())
        .fold(0.0, f64::max)
}

fn lambda_grid(lmax: f64) -> Vec<f64> {
    (0..GRID_POINTS)
        .map(|i| lmax * 10f64.powf(-4.0 * i as f64 / (GRID_POINTS - 1) as f64))
        .collect()
}

/// Indices that sort rows canonically (levels, then response bits).
fn canonical_order(runs: &[Vec<usize>], y: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..y.len()).collect();
    idx.sort_by(|&a, &b| runs[a].cmp(&runs[b]).then(y[a].total_cmp(&y[b])));
    idx
}

fn intercept_only(profile: &[usize], intercept: f64) -> SurrogateModel {
    SurrogateModel {
        profile: profile.to_vec(),
        intercept,
        main_effects: profile.iter().map(|&nl| vec![0.0; nl]).collect(),
        interactions: Vec::new(),
        active_mains: Vec::new(),
        active_pairs: Vec::new(),
        lambda: 0.0,
        cv_error: 0.0,
    }
}

/// Fits the pipeline at one explicit penalty weight, no tuning.
pub fn fit_at(obs: &ObservationSet, lambda: f64) -> Result<SurrogateModel> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidArgument(format!("bad penalty {}", lambda)));
    }
    let (runs, y) = sorted_data(obs)?;
    let profile = obs.design.profile().to_vec();
    // warm the requested penalty from above so small penalties get the
    // path solution rather than an arbitrary interpolator
    let lmax = lambda_max(&runs, &y, &profile);
    let mut warm = HashMap::new();
    let mut raw = fit_pipeline(&runs, &y, &profile, lmax.max(lambda), &mut warm);
    if lambda < lmax {
        for &l in lambda_grid(lmax).iter().skip(1) {
            if l <= lambda {
                break;
            }
            // intermediate fits are discarded; they only warm the cache
            fit_pipeline(&runs, &y, &profile, l, &mut warm);
        }
        raw = fit_pipeline(&runs, &y, &profile, lambda, &mut warm);
    }
    Ok(canonicalize(raw, lambda, 0.0))
}

fn sorted_data(obs: &ObservationSet) -> Result<(Vec<Vec<usize>>, Vec<f64>)> {
    if obs.n() == 0 {
        return Err(Error::EmptyData("no observations to fit".into()));
    }
    let order = canonical_order(obs.design.runs(), &obs.y);
    let runs: Vec<Vec<usize>> = order.iter().map(|&i| obs.design.runs()[i].clone()).collect();
    let y: Vec<f64> = order.iter().map(|&i| obs.y[i]).collect();
    Ok((runs, y))
}

/// Fits the surrogate with the shared penalty chosen by K-fold
/// cross-validation of the whole pipeline. `cv_folds = 0` means the
/// default policy (5 folds; leave-one-out below 15 rows). Deterministic
/// given the observations and seed, whatever the row order.
pub fn fit(obs: &ObservationSet, cv_folds: usize, seed: u64) -> Result<SurrogateModel> {
    let (runs, y) = sorted_data(obs)?;
    let profile = obs.design.profile().to_vec();
    let n = y.len();
    let ybar = y.iter().sum::<f64>() / n as f64;

    let lmax = lambda_max(&runs, &y, &profile);
    if lmax < 1e-12 || n == 1 {
        // constant response (or a single row): nothing to estimate
        return Ok(intercept_only(&profile, ybar));
    }
    let folds = if n < 15 {
        n
    } else if cv_folds == 0 {
        DEFAULT_CV_FOLDS
    } else {
        cv_folds.clamp(2, n)
    };
    let grid = lambda_grid(lmax);

    let mut assignment: Vec<usize> = (0..n).collect();
    assignment.shuffle(&mut rng_from_seed(mix_seed(seed, &[0xF01D])));

    let mut errs: Vec<Vec<f64>> = vec![Vec::with_capacity(folds); grid.len()];
    for fold in 0..folds {
        let val: BTreeSet<usize> = assignment
            .iter()
            .enumerate()
            .filter(|(pos, _)| pos % folds == fold)
            .map(|(_, &i)| i)
            .collect();
        if val.is_empty() || val.len() == n {
            continue;
        }
        let train_runs: Vec<Vec<usize>> = (0..n)
            .filter(|i| !val.contains(i))
            .map(|i| runs[i].clone())
            .collect();
        let train_y: Vec<f64> =
            (0..n).filter(|i| !val.contains(i)).map(|i| y[i]).collect();
        let mut warm = HashMap::new();
        for (g, &lambda) in grid.iter().enumerate() {
            let raw = fit_pipeline(&train_runs, &train_y, &profile, lambda, &mut warm);
            let sse: f64 = val
                .iter()
                .map(|&i| {
                    let e = raw.eval(&runs[i]) - y[i];
                    e * e
                })
                .sum();
            errs[g].push(sse / val.len() as f64);
        }
    }
    let mean: Vec<f64> = errs
        .iter()
        .map(|v| v.iter().sum::<f64>() / v.len().max(1) as f64)
        .collect();
    // argmin over the descending grid; ties keep the largest penalty
    let mut best = 0;
    for g in 1..grid.len() {
        if mean[g] < mean[best] {
            best = g;
        }
    }
    let lambda = grid[best];
    // refit along the path down to the winner, exactly as the
    // cross-validation fits were produced; a cold start at a small
    // penalty could land on a different, arbitrary interpolator
    let mut warm = HashMap::new();
    let mut raw = fit_pipeline(&runs, &y, &profile, grid[0], &mut warm);
    for &l in &grid[1..=best] {
        raw = fit_pipeline(&runs, &y, &profile, l, &mut warm);
    }
    Ok(canonicalize(raw, lambda, mean[best]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oa::{augment, smallest_oa, OaRequest};
    use crate::space::Provenance;
    use crate::testbed;

    fn additive_obs(profile: &[usize], seed: u64, copies: usize) -> ObservationSet {
        let obj = testbed::random_additive(profile, seed).unwrap();
        let d = smallest_oa(&OaRequest::new(profile.to_vec())).unwrap();
        let d = augment(&d, copies, seed).unwrap();
        obj.evaluate_design(&d).unwrap()
    }

    #[test]
    fn constant_response_gives_flagged_intercept_model() {
        let d = smallest_oa(&OaRequest::new(vec![3; 4])).unwrap();
        let obs = ObservationSet::new(d, vec![2.5; 9]).unwrap();
        let m = fit(&obs, 0, 1).unwrap();
        assert!(m.is_intercept_only());
        assert_eq!(m.intercept, 2.5);
        assert!(m.main_effects.iter().flatten().all(|&c| c == 0.0));
    }

    #[test]
    fn huge_penalty_degenerates_to_intercept_only() {
        let obs = additive_obs(&[4; 5], 3, 2);
        let ybar = obs.y.iter().sum::<f64>() / obs.n() as f64;
        let m = fit_at(&obs, 1e6).unwrap();
        assert!(m.is_intercept_only());
        assert!((m.intercept - ybar).abs() < 1e-9);
    }

    #[test]
    fn tiny_penalty_reproduces_in_class_data_in_sample() {
        let obj = testbed::random_additive(&[4; 5], 11).unwrap();
        let d = smallest_oa(&OaRequest::new(vec![4; 5])).unwrap();
        let d = augment(&d, 2, 7).unwrap();
        let obs = obj.evaluate_design(&d).unwrap();
        let lmax = lambda_max(obs.design.runs(), &obs.y, obs.design.profile());
        let m = fit_at(&obs, lmax * 1e-4).unwrap();
        let mse: f64 = (0..obs.n())
            .map(|i| {
                let e = m.evaluate(&obs.design.setting(i)) - obs.y[i];
                e * e
            })
            .sum::<f64>()
            / obs.n() as f64;
        assert!(mse.sqrt() < 1e-2, "rmse {}", mse.sqrt());
    }

    #[test]
    fn additive_data_yields_mostly_main_effects_and_good_holdout() {
        let obj = testbed::random_additive(&[4; 5], 21).unwrap();
        let d = smallest_oa(&OaRequest::new(vec![4; 5])).unwrap();
        let d = augment(&d, 2, 9).unwrap();
        let obs = obj.evaluate_design(&d).unwrap();
        let m = fit(&obs, 0, 5).unwrap();
        assert!(interaction_strength(&m) < 0.05, "ratio {}", interaction_strength(&m));
        // held-out accuracy on unseen settings; the sparsity-leaning
        // penalty trades a little shrinkage bias for structure
        let mut rng = rng_from_seed(100);
        use rand::Rng;
        let mut worst = 0.0f64;
        let mut total = 0.0f64;
        for _ in 0..50 {
            let s = Setting::new((0..5).map(|_| rng.gen_range(1..=4)).collect());
            let truth = obj.noiseless(&s).unwrap();
            let err = (m.evaluate(&s) - truth).abs();
            worst = worst.max(err);
            total += err;
        }
        assert!(worst < 0.5, "worst holdout error {}", worst);
        assert!(total / 50.0 < 0.2, "mean holdout error {}", total / 50.0);
    }

    #[test]
    fn product_pattern_activates_the_interaction() {
        // y = lv1 * lv2 on a replicated 2x2 full factorial
        let mut runs = Vec::new();
        let mut y = Vec::new();
        for _ in 0..4 {
            for a in 1..=2usize {
                for b in 1..=2usize {
                    runs.push(vec![a, b]);
                    y.push((a * b) as f64);
                }
            }
        }
        let d = Design::new(vec![2, 2], runs, Provenance::External, "replicated").unwrap();
        let obs = ObservationSet::new(d, y).unwrap();
        let m = fit(&obs, 0, 2).unwrap();
        assert!(m.active_pairs.contains(&(0, 1)), "pairs {:?}", m.active_pairs);
        // exact fit: the class contains the truth
        for (run, &truth) in obs.design.runs().iter().zip(&obs.y) {
            assert!((m.evaluate(&Setting::new(run.clone())) - truth).abs() < 1e-3);
        }
    }

    #[test]
    fn fitted_models_satisfy_heredity_and_centering_invariants() {
        for seed in 0..6 {
            let obj = testbed::random_product(&[3, 3, 3, 3], seed).unwrap();
            let d = smallest_oa(&OaRequest::new(vec![3; 4])).unwrap();
            let d = augment(&d, 3, seed).unwrap();
            let obs = obj.evaluate_design(&d).unwrap();
            let m = fit(&obs, 0, seed).unwrap();
            for &(f1, f2) in &m.active_pairs {
                assert!(
                    m.active_mains.contains(&f1) || m.active_mains.contains(&f2),
                    "orphan interaction ({}, {})",
                    f1,
                    f2
                );
            }
            for main in &m.main_effects {
                assert!(main.iter().sum::<f64>().abs() < 1e-9);
            }
            for b in &m.interactions {
                for row in &b.coef {
                    assert!(row.iter().sum::<f64>().abs() < 1e-9);
                }
                for c in 0..b.coef[0].len() {
                    assert!(b.coef.iter().map(|r| r[c]).sum::<f64>().abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn fit_is_invariant_to_row_order() {
        let obs = additive_obs(&[3; 4], 8, 2);
        let m1 = fit(&obs, 0, 3).unwrap();
        // rotate rows
        let n = obs.n();
        let runs: Vec<Vec<usize>> =
            (0..n).map(|i| obs.design.runs()[(i + 7) % n].clone()).collect();
        let y: Vec<f64> = (0..n).map(|i| obs.y[(i + 7) % n]).collect();
        let d = Design::new(vec![3; 4], runs, Provenance::External, "rotated").unwrap();
        let m2 = fit(&ObservationSet::new(d, y).unwrap(), 0, 3).unwrap();
        assert_eq!(m1, m2);
    }

    #[test]
    fn evaluate_is_the_plain_linear_predictor() {
        let m = SurrogateModel {
            profile: vec![2, 3],
            intercept: 1.5,
            main_effects: vec![vec![-0.5, 0.5], vec![0.0, 0.0, 0.0]],
            interactions: vec![InteractionBlock {
                factors: (0, 1),
                coef: vec![vec![0.25, -0.25, 0.0], vec![-0.25, 0.25, 0.0]],
            }],
            active_mains: vec![0, 1],
            active_pairs: vec![(0, 1)],
            lambda: 0.1,
            cv_error: 0.0,
        };
        assert_eq!(m.evaluate(&Setting::new(vec![1, 1])), 1.5 - 0.5 + 0.25);
        assert_eq!(m.evaluate(&Setting::new(vec![2, 2])), 1.5 + 0.5 + 0.25);
        assert_eq!(m.evaluate(&Setting::new(vec![1, 3])), 1.0);
        let empty = intercept_only(&[2, 3], 4.0);
        assert_eq!(empty.evaluate(&Setting::new(vec![2, 3])), 4.0);
        assert_eq!(interaction_strength(&empty), 0.0);
    }

    #[test]
    fn model_round_trips_through_json() {
        let obs = additive_obs(&[3; 4], 14, 2);
        let m = fit(&obs, 0, 1).unwrap();
        let back: SurrogateModel = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn fit_is_deterministic_given_seed() {
        let obs = additive_obs(&[4; 5], 5, 2);
        assert_eq!(fit(&obs, 0, 9).unwrap(), fit(&obs, 0, 9).unwrap());
    }
}
