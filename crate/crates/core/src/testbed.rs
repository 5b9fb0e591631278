//! Synthetic objectives for ground-truth experiments: built-in test
//! functions, mid-interval discretization, noise injection, a
//! worst-case-deviation wrapper, a brute-force oracle, and a checker
//! for the marginal-conditional consistency condition.
//!
//! Optimizers only ever see level indices; the index-to-physical
//! mapping lives here. Every true-objective call goes through
//! [`DiscretizedObjective::evaluate`] and bumps an atomic counter, so
//! budget accounting is exact even under concurrent evaluation.
//! Predicted settings are scored with [`DiscretizedObjective::noiseless`],
//! which neither counts nor perturbs.

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::space::{Design, FactorSpace, FactorSpec, ObservationSet, Setting};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

type DynFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A continuous function on a finite box, used as ground truth.
#[derive(Clone)]
pub struct ContinuousFn {
    name: String,
    domain: Vec<(f64, f64)>,
    f: DynFn,
}

impl ContinuousFn {
    pub fn new(
        name: impl Into<String>,
        domain: Vec<(f64, f64)>,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if domain.is_empty() {
            return Err(Error::InvalidArgument("empty domain".into()));
        }
        for &(lo, hi) in &domain {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::InvalidArgument(format!(
                    "bad box side [{}, {}]",
                    lo, hi
                )));
            }
        }
        Ok(ContinuousFn { name: name.into(), domain, f: Arc::new(f) })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        (self.f)(x)
    }
}

/// 10 sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4 + 5 x5 on [0,1]^5.
pub fn friedman() -> ContinuousFn {
    ContinuousFn::new("friedman", vec![(0.0, 1.0); 5], |x| {
        10.0 * (std::f64::consts::PI * x[0] * x[1]).sin()
            + 20.0 * (x[2] - 0.5).powi(2)
            + 10.0 * x[3]
            + 5.0 * x[4]
    })
    .unwrap()
}

/// 4 (x1 - 2 + 8 x2 - 8 x2^2)^2 + (3 - 4 x2)^2
/// + 16 sqrt(x3 + 1) (2 x3 - 1)^2 + 30 ln(1 + x3) on [0,1]^3.
pub fn detpep10() -> ContinuousFn {
    ContinuousFn::new("detpep10", vec![(0.0, 1.0); 3], |x| {
        let a = x[0] - 2.0 + 8.0 * x[1] - 8.0 * x[1] * x[1];
        4.0 * a * a
            + (3.0 - 4.0 * x[1]).powi(2)
            + 16.0 * (x[2] + 1.0).sqrt() * (2.0 * x[2] - 1.0).powi(2)
            + 30.0 * (1.0 + x[2]).ln()
    })
    .unwrap()
}

/// Sum over consecutive triples (a, b, c) of
/// 100 (e^{-2/a^1.75} + e^{-2/b^1.5} + e^{-2/c^1.25} + 0.01 a b c)
/// on (0,1]^p; p must be a multiple of 3.
pub fn detpep10e(p: usize) -> Result<ContinuousFn> {
    if p == 0 || p % 3 != 0 {
        return Err(Error::InvalidArgument(format!(
            "detpep10e needs p divisible by 3, got {}",
            p
        )));
    }
    ContinuousFn::new(format!("detpep10e:{}", p), vec![(0.0, 1.0); p], move |x| {
        let mut total = 0.0;
        for t in x.chunks_exact(3) {
            total += 100.0
                * ((-2.0 / t[0].powf(1.75)).exp()
                    + (-2.0 / t[1].powf(1.5)).exp()
                    + (-2.0 / t[2].powf(1.25)).exp()
                    + 0.01 * t[0] * t[1] * t[2]);
        }
        total
    })
}

/// Sum over consecutive pairs (a, b) of
/// (4 - 2.1 a + a^4 / 3) a^2 + a b + (-4 + 4 b^2) b^2
/// on ([-2,2] x [-1,1])^{p/2}; p must be even.
pub fn camel6(p: usize) -> Result<ContinuousFn> {
    if p == 0 || p % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "camel6 needs even p, got {}",
            p
        )));
    }
    let mut domain = Vec::with_capacity(p);
    for k in 0..p {
        domain.push(if k % 2 == 0 { (-2.0, 2.0) } else { (-1.0, 1.0) });
    }
    ContinuousFn::new(format!("camel6:{}", p), domain, |x| {
        let mut total = 0.0;
        for t in x.chunks_exact(2) {
            let (a, b) = (t[0], t[1]);
            total += (4.0 - 2.1 * a + a.powi(4) / 3.0) * a * a
                + a * b
                + (-4.0 + 4.0 * b * b) * b * b;
        }
        total
    })
}

/// (1/10^p) { prod_l sum_{i=1..5} i cos((i+1) x_l + i) + 0.01 prod_l x_l }
/// on [-10,10]^p.
pub fn shubert(p: usize) -> Result<ContinuousFn> {
    if p == 0 {
        return Err(Error::InvalidArgument("shubert needs p >= 1".into()));
    }
    ContinuousFn::new(format!("shubert:{}", p), vec![(-10.0, 10.0); p], move |x| {
        let mut prod = 1.0;
        let mut xprod = 1.0;
        for &v in x {
            let mut s = 0.0;
            for i in 1..=5 {
                let i = i as f64;
                s += i * ((i + 1.0) * v + i).cos();
            }
            prod *= s;
            xprod *= v;
        }
        (prod + 0.01 * xprod) / 10f64.powi(p as i32)
    })
}

/// Built-in objective by name. `p` overrides the default dimension for
/// the families that take one (detpep10e 9, camel6 8, shubert 10);
/// friedman and detpep10 have fixed dimensions 5 and 3.
pub fn builtin(name: &str, p: Option<usize>) -> Result<ContinuousFn> {
    match name {
        "friedman" => match p {
            None | Some(5) => Ok(friedman()),
            Some(q) => Err(Error::InvalidArgument(format!(
                "friedman is 5-dimensional, got p = {}",
                q
            ))),
        },
        "detpep10" => match p {
            None | Some(3) => Ok(detpep10()),
            Some(q) => Err(Error::InvalidArgument(format!(
                "detpep10 is 3-dimensional, got p = {}",
                q
            ))),
        },
        "detpep10e" => detpep10e(p.unwrap_or(9)),
        "camel6" => camel6(p.unwrap_or(8)),
        "shubert" => shubert(p.unwrap_or(10)),
        other => Err(Error::InvalidArgument(format!(
            "unknown objective '{}' (expected friedman, detpep10, detpep10e, camel6, shubert)",
            other
        ))),
    }
}

type LevelFn = Arc<dyn Fn(&[usize]) -> f64 + Send + Sync>;

/// A black box over level indices with exact call accounting and
/// optional Gaussian observation noise.
pub struct DiscretizedObjective {
    name: String,
    space: FactorSpace,
    /// Physical value behind each (factor, level), when there is one.
    grid: Vec<Vec<f64>>,
    eval_levels: LevelFn,
    noise_sd: f64,
    counter: AtomicU64,
    noise_rng: Mutex<ChaCha12Rng>,
}

/// Mid-interval discretization: level j of factor l maps to
/// lo_l + (j - 0.5) (hi_l - lo_l) / N_l.
pub fn discretize(f: &ContinuousFn, levels: usize) -> Result<DiscretizedObjective> {
    discretize_profile(f, &vec![levels; f.dim()])
}

/// Mid-interval discretization with a per-factor level count.
pub fn discretize_profile(f: &ContinuousFn, profile: &[usize]) -> Result<DiscretizedObjective> {
    if profile.len() != f.dim() {
        return Err(Error::InvalidArgument(format!(
            "{} level counts for {} dimensions",
            profile.len(),
            f.dim()
        )));
    }
    let grid: Vec<Vec<f64>> = f
        .domain()
        .iter()
        .zip(profile)
        .map(|(&(lo, hi), &n)| {
            (1..=n)
                .map(|j| lo + (j as f64 - 0.5) * (hi - lo) / n as f64)
                .collect()
        })
        .collect();
    let g = grid.clone();
    let inner = f.clone();
    DiscretizedObjective::build(f.name(), grid, move |levels: &[usize]| {
        let x: Vec<f64> = levels.iter().enumerate().map(|(l, &j)| g[l][j - 1]).collect();
        inner.eval(&x)
    })
}

impl DiscretizedObjective {
    fn build(
        name: impl Into<String>,
        grid: Vec<Vec<f64>>,
        eval_levels: impl Fn(&[usize]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let specs: Vec<FactorSpec> = grid
            .iter()
            .map(|g| FactorSpec::ordinal(g.len()).with_physical(g.clone()))
            .collect();
        Ok(DiscretizedObjective {
            name: name.into(),
            space: FactorSpace::new(specs)?,
            grid,
            eval_levels: Arc::new(eval_levels),
            noise_sd: 0.0,
            counter: AtomicU64::new(0),
            noise_rng: Mutex::new(rng_from_seed(0)),
        })
    }

    /// An objective defined directly by a function of level indices.
    /// The physical grid is the level index itself.
    pub fn from_levels(
        name: impl Into<String>,
        profile: &[usize],
        eval_levels: impl Fn(&[usize]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let grid = profile
            .iter()
            .map(|&n| (1..=n).map(|j| j as f64).collect())
            .collect();
        DiscretizedObjective::build(name, grid, eval_levels)
    }

    /// Adds i.i.d. N(0, sd^2) noise to every `evaluate` call, drawn
    /// from a stream seeded here. sd = 0 leaves the objective exact.
    pub fn with_noise(mut self, sd: f64, seed: u64) -> Result<Self> {
        if !sd.is_finite() || sd < 0.0 {
            return Err(Error::InvalidArgument(format!("bad noise sd {}", sd)));
        }
        self.noise_sd = sd;
        self.noise_rng = Mutex::new(rng_from_seed(seed));
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &FactorSpace {
        &self.space
    }

    pub fn profile(&self) -> Vec<usize> {
        self.space.profile()
    }

    pub fn p(&self) -> usize {
        self.space.p()
    }

    pub fn noise_sd(&self) -> f64 {
        self.noise_sd
    }

    /// Physical point behind a setting.
    pub fn point(&self, s: &Setting) -> Result<Vec<f64>> {
        self.check(s)?;
        Ok(s.levels.iter().enumerate().map(|(l, &j)| self.grid[l][j - 1]).collect())
    }

    fn check(&self, s: &Setting) -> Result<()> {
        if !self.space.contains(s) {
            return Err(Error::InvalidSetting(format!(
                "setting {} does not fit profile {:?}",
                s,
                self.profile()
            )));
        }
        Ok(())
    }

    /// One true-objective call: counted, and noisy when noise is set.
    pub fn evaluate(&self, s: &Setting) -> Result<f64> {
        self.check(s)?;
        self.counter.fetch_add(1, Ordering::Relaxed);
        let clean = (self.eval_levels)(&s.levels);
        if self.noise_sd == 0.0 {
            return Ok(clean);
        }
        let normal = Normal::new(0.0, self.noise_sd).expect("validated sd");
        let draw = normal.sample(&mut *self.noise_rng.lock().unwrap());
        Ok(clean + draw)
    }

    /// Evaluates every run of a design, in order.
    pub fn evaluate_design(&self, design: &Design) -> Result<ObservationSet> {
        let mut y = Vec::with_capacity(design.n());
        for i in 0..design.n() {
            y.push(self.evaluate(&design.setting(i))?);
        }
        let mut obs = ObservationSet::new(design.clone(), y)?;
        if self.noise_sd > 0.0 {
            obs.noise_sd = Some(self.noise_sd);
        }
        Ok(obs)
    }

    /// Exact objective value, for scoring predictions: not counted,
    /// never noisy.
    pub fn noiseless(&self, s: &Setting) -> Result<f64> {
        self.check(s)?;
        Ok((self.eval_levels)(&s.levels))
    }

    /// Number of `evaluate` calls so far.
    pub fn eval_count(&self) -> u64 {
        self.counter.load(Ordering::Relaxed)
    }

    pub fn reset_count(&self) {
        self.counter.store(0, Ordering::Relaxed);
    }
}

/// Probe pattern for [`robust_wrap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeScheme {
    /// Center plus all 2^p sign combinations of the tolerances.
    Corners,
    /// Center plus one +/- probe per axis (2p + 1 points).
    Axial,
}

/// Worst-case deviation from a target under physical tolerances:
/// f(x) = max over probe offsets t of |C(x + t) - target|, with
/// t_l = tol_frac[l] * (hi_l - lo_l). The inner function must be
/// defined on a neighborhood of each grid point; probes are not
/// clamped to the box.
pub fn robust_wrap(
    inner: &ContinuousFn,
    levels: usize,
    target: f64,
    tol_frac: &[f64],
    scheme: ProbeScheme,
) -> Result<DiscretizedObjective> {
    let p = inner.dim();
    if tol_frac.len() != p {
        return Err(Error::InvalidArgument(format!(
            "{} tolerance fractions for {} dimensions",
            tol_frac.len(),
            p
        )));
    }
    if let Some(&bad) = tol_frac.iter().find(|t| !t.is_finite() || **t < 0.0) {
        return Err(Error::InvalidArgument(format!("bad tolerance fraction {}", bad)));
    }
    if scheme == ProbeScheme::Corners && p > 12 {
        return Err(Error::TooLarge(format!(
            "corner probes are 2^{} points; use the axial scheme above p = 12",
            p
        )));
    }
    let tol: Vec<f64> = inner
        .domain()
        .iter()
        .zip(tol_frac)
        .map(|(&(lo, hi), &t)| t * (hi - lo))
        .collect();
    let mut offsets: Vec<Vec<f64>> = vec![vec![0.0; p]];
    match scheme {
        ProbeScheme::Corners => {
            for mask in 0..(1usize << p) {
                let off = (0..p)
                    .map(|l| if mask >> l & 1 == 1 { tol[l] } else { -tol[l] })
                    .collect();
                offsets.push(off);
            }
        }
        ProbeScheme::Axial => {
            for l in 0..p {
                for sign in [-1.0, 1.0] {
                    let mut off = vec![0.0; p];
                    off[l] = sign * tol[l];
                    offsets.push(off);
                }
            }
        }
    }
    let base = discretize(inner, levels)?;
    let grid = base.grid.clone();
    let g = grid.clone();
    let f = inner.clone();
    DiscretizedObjective::build(
        format!("robust({},target={})", inner.name(), target),
        grid,
        move |levels: &[usize]| {
            let x: Vec<f64> =
                levels.iter().enumerate().map(|(l, &j)| g[l][j - 1]).collect();
            let mut worst = f64::NEG_INFINITY;
            let mut probe = vec![0.0; x.len()];
            for off in &offsets {
                for l in 0..x.len() {
                    probe[l] = x[l] + off[l];
                }
                worst = worst.max((f.eval(&probe) - target).abs());
            }
            worst
        },
    )
}

/// Exact minimizer over the full factorial, found by enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForce {
    pub setting: Setting,
    pub value: f64,
}

/// Noiseless exhaustive minimization; does not touch the eval counter.
/// Ties keep the lexicographically first setting.
pub fn brute_force(obj: &DiscretizedObjective, cap: Option<u64>) -> Result<BruteForce> {
    let mut best: Option<BruteForce> = None;
    for s in obj.space().enumerate(cap)? {
        let v = obj.noiseless(&s)?;
        if best.as_ref().map_or(true, |b| v < b.value) {
            best = Some(BruteForce { setting: s, value: v });
        }
    }
    Ok(best.expect("factor spaces are never empty"))
}

/// The full factorial evaluated noiselessly as an observation set,
/// in enumeration order. Does not touch the eval counter.
pub fn full_table(obj: &DiscretizedObjective, cap: Option<u64>) -> Result<ObservationSet> {
    let mut runs = Vec::new();
    let mut y = Vec::new();
    for s in obj.space().enumerate(cap)? {
        y.push(obj.noiseless(&s)?);
        runs.push(s.levels);
    }
    let d = Design::new(
        obj.profile(),
        runs,
        crate::space::Provenance::External,
        "full_factorial",
    )?;
    ObservationSet::new(d, y)
}

/// One slice where the marginal-mean-best level is beaten.
#[derive(Debug, Clone, PartialEq)]
pub struct McWitness {
    /// 0-based factor whose marginal choice fails in this slice.
    pub factor: usize,
    /// The slice, with `factor` set to its conditional minimizer.
    pub slice_best: Setting,
    /// Level the marginal means chose for `factor`.
    pub marginal_level: usize,
    /// How far the marginal choice sits above the slice minimum.
    pub gap: f64,
}

/// Outcome of [`check_mc`].
#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    /// True when the marginal-mean choice minimizes every slice.
    pub holds: bool,
    /// Marginal-mean setting computed from the full noiseless table.
    pub am_setting: Setting,
    /// Total number of violated (factor, slice) pairs.
    pub violations: u64,
    /// Up to 16 concrete violations.
    pub witnesses: Vec<McWitness>,
}

/// Checks marginal-conditional consistency on the full noiseless
/// table: the level the marginal means pick for each factor must
/// minimize every conditional slice of that factor. When this holds,
/// the marginal-mean predictor on full data is a global minimizer.
pub fn check_mc(obj: &DiscretizedObjective, cap: Option<u64>) -> Result<McReport> {
    let table = full_table(obj, cap)?;
    let am = crate::stats::predict_am(&table)?;
    let profile = obj.profile();
    let mut violations = 0u64;
    let mut witnesses = Vec::new();
    for l in 0..obj.p() {
        // enumerate slices x_{-l} via the reduced space
        let others: Vec<usize> =
            (0..obj.p()).filter(|&k| k != l).map(|k| profile[k]).collect();
        let reduced = FactorSpace::from_profile(&others)?;
        for ctx in reduced.enumerate(cap)? {
            let mut s = Setting::new(vec![0; obj.p()]);
            for (k, &lv) in (0..obj.p()).filter(|&k| k != l).zip(&ctx.levels) {
                s.levels[k] = lv;
            }
            let mut best_level = 1;
            let mut best = f64::INFINITY;
            let mut at_am = f64::INFINITY;
            for lv in 1..=profile[l] {
                s.levels[l] = lv;
                let v = obj.noiseless(&s)?;
                if v < best {
                    best = v;
                    best_level = lv;
                }
                if lv == am.levels[l] {
                    at_am = v;
                }
            }
            if at_am > best {
                violations += 1;
                if witnesses.len() < 16 {
                    s.levels[l] = best_level;
                    witnesses.push(McWitness {
                        factor: l,
                        slice_best: s.clone(),
                        marginal_level: am.levels[l],
                        gap: at_am - best,
                    });
                }
            }
        }
    }
    Ok(McReport { holds: violations == 0, am_setting: am, violations, witnesses })
}

/// Random additive objective: f(x) = sum_l g_l(x_l) with level effects
/// drawn i.i.d. N(0, 1). Marginal-conditional consistency holds by
/// construction.
pub fn random_additive(profile: &[usize], seed: u64) -> Result<DiscretizedObjective> {
    let mut rng = rng_from_seed(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let effects: Vec<Vec<f64>> = profile
        .iter()
        .map(|&n| (0..n).map(|_| normal.sample(&mut rng)).collect())
        .collect();
    DiscretizedObjective::from_levels(
        format!("random_additive(seed={})", seed),
        profile,
        move |levels| {
            levels.iter().enumerate().map(|(l, &j)| effects[l][j - 1]).sum()
        },
    )
}

/// Random strong-interaction objective: each consecutive factor pair
/// contributes a two-factor table built as additive ramps with one
/// bargain cell hiding in an expensive row and column, the many-level
/// analog of the 2x2 counterexample [[0, 7], [5, 1]]. The bargain cell
/// undercuts the whole table, but every other cell sharing its row or
/// column is lifted well above the rest, so level averages condemn
/// both of its coordinates and point at the ramp minimum instead.
/// Averaging is therefore misled on both coordinates of every pair;
/// only short tails reveal the bargain, and even modest averaging over
/// a level's better half drowns it again. p must be even and each
/// factor needs 3+ levels (in a 2-level table the lift lands on single
/// cells and cancels out of the row-mean comparison).
pub fn random_product(profile: &[usize], seed: u64) -> Result<DiscretizedObjective> {
    if profile.len() % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "random_product needs an even factor count, got {}",
            profile.len()
        )));
    }
    if let Some(&nl) = profile.iter().find(|&&nl| nl < 3) {
        return Err(Error::InvalidArgument(format!(
            "random_product needs 3+ levels per factor, got {}",
            nl
        )));
    }
    let mut rng = rng_from_seed(seed);
    let tables: Vec<Vec<Vec<f64>>> = profile
        .chunks_exact(2)
        .map(|pair| spiked_table(pair[0], pair[1], &mut rng))
        .collect();
    DiscretizedObjective::from_levels(
        format!("random_product(seed={})", seed),
        profile,
        move |levels| {
            levels
                .chunks_exact(2)
                .enumerate()
                .map(|(k, pair)| tables[k][pair[0] - 1][pair[1] - 1])
                .sum()
        },
    )
}

/// Ramps u_a + w_b with one bargain cell placed off both marginal
/// minima. The bargain undercuts the ramp floor, while the rest of its
/// row and column are lifted far above the whole ramp range, so the
/// bargain's coordinates carry the best single cell and the worst
/// averages at the same time.
fn spiked_table(rows: usize, cols: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let u: Vec<f64> = (0..rows).map(|_| rng.gen_range(0.0..1.0)).collect();
    let w: Vec<f64> = (0..cols).map(|_| rng.gen_range(0.0..1.0)).collect();
    let a_min = argmin(&u);
    let b_min = argmin(&w);
    let a_spike = pick_other(rows, a_min, rng);
    let b_spike = pick_other(cols, b_min, rng);
    // ramps stay in [0, 2]; the lift pushes the bargain's row and
    // column past everything, the margin drops the bargain below the
    // ramp floor by enough to survive a little shrinkage in a fit
    let lift = rng.gen_range(2.0..3.0);
    let margin = rng.gen_range(0.5..1.0);
    let mut t: Vec<Vec<f64>> = (0..rows)
        .map(|a| (0..cols).map(|b| u[a] + w[b]).collect())
        .collect();
    for b in 0..cols {
        if b != b_spike {
            t[a_spike][b] += lift;
        }
    }
    for a in 0..rows {
        if a != a_spike {
            t[a][b_spike] += lift;
        }
    }
    t[a_spike][b_spike] = u[a_min] + w[b_min] - margin;
    t
}

/// Uniform draw from 0..n excluding `skip`.
fn pick_other(n: usize, skip: usize, rng: &mut impl Rng) -> usize {
    let i = rng.gen_range(0..n - 1);
    if i >= skip {
        i + 1
    } else {
        i
    }
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oa;
    use approx::assert_relative_eq;

    #[test]
    fn builtin_hand_values() {
        let f = friedman();
        assert_relative_eq!(
            f.eval(&[0.5; 5]),
            10.0 * (std::f64::consts::FRAC_PI_4).sin() + 7.5,
            epsilon = 1e-12
        );
        let c = camel6(8).unwrap();
        assert_eq!(c.eval(&[0.0; 8]), 0.0);
        assert_eq!(c.domain()[0], (-2.0, 2.0));
        assert_eq!(c.domain()[1], (-1.0, 1.0));
        let d = detpep10();
        // at (0.3, 0.7, 0.3): small quadratic part plus the x3 terms
        let v = d.eval(&[0.3, 0.7, 0.3]);
        assert!((v - 10.83).abs() < 0.01, "got {}", v);
    }

    #[test]
    fn builtin_rejects_incompatible_p() {
        assert!(builtin("friedman", Some(4)).is_err());
        assert!(builtin("detpep10e", Some(10)).is_err());
        assert!(builtin("camel6", Some(7)).is_err());
        assert!(builtin("nope", None).is_err());
        assert_eq!(builtin("shubert", None).unwrap().dim(), 10);
    }

    #[test]
    fn discretize_uses_interval_midpoints() {
        let f = ContinuousFn::new("id", vec![(0.0, 1.0), (-10.0, 10.0)], |x| {
            x[0] + x[1]
        })
        .unwrap();
        let obj = discretize_profile(&f, &[5, 4]).unwrap();
        let pt = obj.point(&Setting::new(vec![1, 1])).unwrap();
        assert_eq!(pt, vec![0.1, -7.5]);
        let pt = obj.point(&Setting::new(vec![5, 4])).unwrap();
        assert_eq!(pt, vec![0.9, 7.5]);
    }

    #[test]
    fn discretized_builtins_match_formulas_at_midpoints() {
        let mut rng = rng_from_seed(7);
        for f in [
            friedman(),
            detpep10(),
            detpep10e(9).unwrap(),
            camel6(8).unwrap(),
            shubert(3).unwrap(),
        ] {
            let obj = discretize(&f, 4).unwrap();
            for _ in 0..100 {
                let s = Setting::new(
                    (0..f.dim()).map(|_| rng.gen_range(1..=4)).collect(),
                );
                let x = obj.point(&s).unwrap();
                assert_eq!(obj.noiseless(&s).unwrap(), f.eval(&x), "{}", f.name());
            }
        }
    }

    #[test]
    fn counter_counts_evaluate_only() {
        let obj = discretize(&friedman(), 5).unwrap();
        let s = Setting::new(vec![1; 5]);
        assert_eq!(obj.eval_count(), 0);
        obj.evaluate(&s).unwrap();
        obj.evaluate(&s).unwrap();
        obj.noiseless(&s).unwrap();
        brute_force(&obj, None).unwrap();
        assert_eq!(obj.eval_count(), 2);
        obj.reset_count();
        assert_eq!(obj.eval_count(), 0);
    }

    #[test]
    fn noise_is_seeded_and_zero_sd_is_identity() {
        let s = Setting::new(vec![2; 5]);
        let a = discretize(&friedman(), 5).unwrap().with_noise(0.5, 9).unwrap();
        let b = discretize(&friedman(), 5).unwrap().with_noise(0.5, 9).unwrap();
        let va: Vec<f64> = (0..5).map(|_| a.evaluate(&s).unwrap()).collect();
        let vb: Vec<f64> = (0..5).map(|_| b.evaluate(&s).unwrap()).collect();
        assert_eq!(va, vb);
        assert!(va.windows(2).any(|w| w[0] != w[1]));
        let c = discretize(&friedman(), 5).unwrap().with_noise(0.0, 9).unwrap();
        assert_eq!(c.evaluate(&s).unwrap(), c.noiseless(&s).unwrap());
    }

    #[test]
    fn noise_sample_mean_is_centered() {
        let obj = discretize(&friedman(), 5).unwrap().with_noise(0.5, 3).unwrap();
        let s = Setting::new(vec![3; 5]);
        let clean = obj.noiseless(&s).unwrap();
        let m: f64 =
            (0..10_000).map(|_| obj.evaluate(&s).unwrap()).sum::<f64>() / 10_000.0;
        // 4 sigma / sqrt(10^4)
        assert!((m - clean).abs() < 4.0 * 0.5 / 100.0, "mean {} vs {}", m, clean);
    }

    #[test]
    fn friedman_oracle_value_and_location() {
        let obj = discretize(&friedman(), 5).unwrap();
        let best = brute_force(&obj, None).unwrap();
        assert!((best.value - 1.814).abs() < 0.01, "got {}", best.value);
        assert_eq!(best.setting.levels, vec![1, 1, 3, 1, 1]);
    }

    #[test]
    fn detpep10_oracle_value() {
        let obj = discretize(&detpep10(), 5).unwrap();
        let best = brute_force(&obj, None).unwrap();
        assert!((best.value - 10.83).abs() < 0.01, "got {}", best.value);
    }

    #[test]
    fn pick_the_winner_on_full_table_equals_brute_force() {
        let obj = discretize(&detpep10(), 5).unwrap();
        let table = full_table(&obj, None).unwrap();
        let pw = crate::stats::predict_pw(&table).unwrap();
        let best = brute_force(&obj, None).unwrap();
        assert_eq!(pw, best.setting);
    }

    #[test]
    fn mc_holds_for_additive_and_fails_for_two_by_two_counterexample() {
        let add = random_additive(&[3, 4, 3], 5).unwrap();
        let rep = check_mc(&add, None).unwrap();
        assert!(rep.holds);

        // f(1,1)=0, f(1,2)=7, f(2,1)=5, f(2,2)=1: marginal means pick
        // (1, 1) (2 vs 3 for f1; 2.5 vs 4 for f2) but slices disagree
        let table = [[0.0, 7.0], [5.0, 1.0]];
        let obj = DiscretizedObjective::from_levels("toy", &[2, 2], move |lv| {
            table[lv[0] - 1][lv[1] - 1]
        })
        .unwrap();
        let rep = check_mc(&obj, None).unwrap();
        assert!(!rep.holds);
        assert!(rep.violations > 0);
        assert!(!rep.witnesses.is_empty());
        let w = &rep.witnesses[0];
        assert!(w.gap > 0.0);
    }

    #[test]
    fn mc_fails_for_detpep10_grid() {
        let obj = discretize(&detpep10(), 5).unwrap();
        let rep = check_mc(&obj, None).unwrap();
        assert!(!rep.holds);
        // the marginal-mean choice lands visibly above the true minimum
        let am_val = obj.noiseless(&rep.am_setting).unwrap();
        assert!((am_val - 11.41).abs() < 0.01, "got {}", am_val);
    }

    #[test]
    fn robust_wrap_degenerate_and_constant_cases() {
        let f = ContinuousFn::new("lin", vec![(0.0, 1.0), (0.0, 1.0)], |x| {
            x[0] + x[1]
        })
        .unwrap();
        let exact = robust_wrap(&f, 4, 0.5, &[0.0, 0.0], ProbeScheme::Corners).unwrap();
        let s = Setting::new(vec![1, 1]);
        assert_relative_eq!(
            exact.noiseless(&s).unwrap(),
            (0.125 + 0.125 - 0.5_f64).abs(),
            epsilon = 1e-12
        );

        let c = ContinuousFn::new("const", vec![(0.0, 1.0)], |_| 2.5).unwrap();
        let z = robust_wrap(&c, 3, 2.5, &[0.015], ProbeScheme::Axial).unwrap();
        for j in 1..=3 {
            assert_eq!(z.noiseless(&Setting::new(vec![j])).unwrap(), 0.0);
        }
    }

    #[test]
    fn robust_wrap_corner_dominates_center_for_linear() {
        let f = ContinuousFn::new("lin", vec![(0.0, 1.0); 3], |x| {
            x[0] + 2.0 * x[1] - x[2]
        })
        .unwrap();
        let wrapped = robust_wrap(&f, 4, 0.3, &[0.015; 3], ProbeScheme::Corners).unwrap();
        for s in wrapped.space().enumerate(None).unwrap() {
            let x = wrapped.point(&s).unwrap();
            let center = (f.eval(&x) - 0.3).abs();
            assert!(wrapped.noiseless(&s).unwrap() >= center - 1e-12);
        }
    }

    #[test]
    fn robust_wrap_corners_rejects_high_dimension() {
        let f = ContinuousFn::new("flat", vec![(0.0, 1.0); 13], |_| 0.0).unwrap();
        assert!(robust_wrap(&f, 2, 0.0, &[0.01; 13], ProbeScheme::Corners).is_err());
        assert!(robust_wrap(&f, 2, 0.0, &[0.01; 13], ProbeScheme::Axial).is_ok());
    }

    #[test]
    fn additive_objectives_put_am_at_the_global_minimum() {
        for seed in 0..20 {
            let obj = random_additive(&[3, 5, 4, 3], seed).unwrap();
            assert!(check_mc(&obj, None).unwrap().holds, "seed {}", seed);
            let table = full_table(&obj, None).unwrap();
            let am = crate::stats::predict_am(&table).unwrap();
            let best = brute_force(&obj, None).unwrap();
            assert_eq!(obj.noiseless(&am).unwrap(), best.value, "seed {}", seed);
        }
    }

    #[test]
    fn random_product_has_strong_interactions() {
        let obj = random_product(&[4, 4, 4, 4], 2).unwrap();
        assert!(!check_mc(&obj, None).unwrap().holds);
    }

    #[test]
    fn evaluate_design_matches_per_run_calls() {
        let obj = discretize(&detpep10(), 5).unwrap();
        let d = oa::smallest_oa(&oa::OaRequest::new(vec![5, 5, 5])).unwrap();
        let obs = obj.evaluate_design(&d).unwrap();
        assert_eq!(obs.n(), d.n());
        assert_eq!(obj.eval_count(), d.n() as u64);
        for i in 0..d.n() {
            assert_eq!(obs.y[i], obj.noiseless(&d.setting(i)).unwrap());
        }
    }
}
