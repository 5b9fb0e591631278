//! Gaussian-process regression and expected improvement on discrete
//! factor spaces.
//!
//! The covariance is a product kernel over factors: ordinal factors
//! contribute squared differences of their level indices (or of caller
//! supplied physical coordinates), nominal factors contribute mismatch
//! indicators, and both kinds can mix inside one exponent. Hyper
//! parameters are chosen by maximizing the log marginal likelihood
//! with the constant mean and the amplitude profiled out in closed
//! form, leaving only the length scales and a relative nugget for the
//! numerical search: Nelder-Mead on log parameters from several random
//! starts. Expected improvement and a greedy constant-liar batch rule
//! sit on top of the fitted posterior.
//!
//! Responses are standardized internally; every reported quantity is
//! in the original units.

use crate::error::{Error, Result};
use crate::rng::{mix_seed, rng_from_seed};
use crate::space::{FactorKind, FactorSpace, ObservationSet, Setting};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;

/// Relative-nugget floor; pinning the nugget here keeps a noiseless
/// fit interpolating while the factorization stays comfortable.
pub const NUGGET_FLOOR: f64 = 1e-8;
const NUGGET_HI: f64 = 10.0;
/// Length-scale search window.
const THETA_LO: f64 = 1e-6;
const THETA_HI: f64 = 1e3;
/// Adaptive diagonal jitter tried on factorization failure.
const JITTER_LO: f64 = 1e-10;
const JITTER_HI: f64 = 1e-4;
/// Variance floor reported for constant-response data.
const SIGMA2_FLOOR: f64 = 1e-12;

/// Knobs for [`fit`].
#[derive(Debug, Clone)]
pub struct GpConfig {
    /// Random Nelder-Mead starting points.
    pub multistarts: usize,
    /// Nelder-Mead iterations per start.
    pub nm_iters: usize,
    pub seed: u64,
    /// Pins the relative nugget instead of searching for it. Zero
    /// demands exact interpolation of the training responses.
    pub fixed_nugget: Option<f64>,
    /// Candidate pool limit for [`GpModel::select_batch`]; spaces
    /// beyond it are sampled uniformly instead of enumerated.
    pub candidate_cap: usize,
    /// Physical coordinates behind each factor's levels, used in place
    /// of the level indices for ordinal distances when given.
    pub ordinal_values: Option<Vec<Vec<f64>>>,
}

impl Default for GpConfig {
    fn default() -> Self {
        GpConfig {
            multistarts: 10,
            nm_iters: 500,
            seed: 0,
            fixed_nugget: None,
            candidate_cap: 100_000,
            ordinal_values: None,
        }
    }
}

impl GpConfig {
    pub fn with_seed(seed: u64) -> Self {
        GpConfig { seed, ..GpConfig::default() }
    }
}

/// Posterior moments at one setting, in response units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Posterior {
    pub mean: f64,
    pub sd: f64,
}

/// Batch proposal from [`GpModel::select_batch`]. `exhausted` flags a
/// batch cut short because every candidate was already used.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchSelection {
    pub settings: Vec<Setting>,
    pub exhausted: bool,
}

/// A fitted model: hyperparameters plus the factorized training
/// covariance. Immutable once fitted.
#[derive(Debug, Clone)]
pub struct GpModel {
    kinds: Vec<FactorKind>,
    ordinal_values: Option<Vec<Vec<f64>>>,
    x: Vec<Vec<usize>>,
    y_raw: Vec<f64>,
    y_mean: f64,
    y_sd: f64,
    /// Profiled constant mean, standardized space.
    mean_z: f64,
    /// Profiled amplitude, standardized space.
    sigma2_z: f64,
    theta: Vec<f64>,
    /// Relative nugget: the fitted covariance is sigma2 (R + g I).
    g: f64,
    jitter: f64,
    chol: Option<Cholesky<f64, Dyn>>,
    /// Factorization solve of (z - mean) for fast posterior means.
    alpha: DVector<f64>,
    /// Maximized log marginal likelihood (standardized space).
    log_lik: f64,
    /// Log likelihood at each multi-start initialization.
    start_log_liks: Vec<f64>,
    /// Constant-response data: no structure to fit, posterior falls
    /// back to the sample mean with zero spread.
    degenerate: bool,
}

/// Maximum-likelihood fit. Needs at least three runs; constant
/// responses produce a flagged degenerate model with the variance at
/// its floor.
pub fn fit(obs: &ObservationSet, kinds: &[FactorKind], cfg: &GpConfig) -> Result<GpModel> {
    let (x, z, y_mean, y_sd) = prepare(obs, kinds, cfg)?;
    if obs.n() < 3 {
        return Err(Error::EmptyData(format!(
            "gp fit needs at least 3 runs, got {}",
            obs.n()
        )));
    }
    if y_sd == 0.0 {
        return Ok(degenerate_model(kinds, cfg, x, obs, y_mean));
    }
    let p = kinds.len();
    let dv = pair_distances(&x, kinds, cfg.ordinal_values.as_deref());

    let search_nugget = cfg.fixed_nugget.is_none();
    let dims = p + usize::from(search_nugget);
    let (lo, hi): (Vec<f64>, Vec<f64>) = {
        let mut lo = vec![THETA_LO.ln(); p];
        let mut hi = vec![THETA_HI.ln(); p];
        if search_nugget {
            lo.push(NUGGET_FLOOR.ln());
            hi.push(NUGGET_HI.ln());
        }
        (lo, hi)
    };
    let nll = |params: &[f64]| -> f64 {
        let theta: Vec<f64> = params[..p].iter().map(|t| t.exp()).collect();
        let g = if search_nugget { params[p].exp() } else { cfg.fixed_nugget.unwrap() };
        match profile_nll(&dv, &z, &theta, g) {
            Some(v) => v,
            None => f64::INFINITY,
        }
    };

    let mut rng = rng_from_seed(mix_seed(cfg.seed, &[0x69]));
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut start_log_liks = Vec::with_capacity(cfg.multistarts);
    for _ in 0..cfg.multistarts.max(1) {
        let start: Vec<f64> =
            (0..dims).map(|d| rng.gen_range(lo[d]..=hi[d])).collect();
        start_log_liks.push(-nll(&start));
        let (point, value) = nelder_mead(&nll, &start, &lo, &hi, cfg.nm_iters);
        if best.as_ref().map_or(true, |(_, b)| value < *b) {
            best = Some((point, value));
        }
    }
    let (params, _) = best.expect("at least one start");
    let theta: Vec<f64> = params[..p].iter().map(|t| t.exp()).collect();
    let g = if search_nugget { params[p].exp() } else { cfg.fixed_nugget.unwrap() };

    let mut model = condition(obs, kinds, cfg, x, z, y_mean, y_sd, theta, g)?;
    model.start_log_liks = start_log_liks;
    Ok(model)
}

/// Conditions on the data at caller-chosen hyperparameters; the mean
/// and amplitude are still profiled out. Accepts any positive number
/// of runs, and a zero nugget for exact interpolation.
pub fn fit_fixed(
    obs: &ObservationSet,
    kinds: &[FactorKind],
    theta: Vec<f64>,
    nugget: f64,
    cfg: &GpConfig,
) -> Result<GpModel> {
    if theta.len() != kinds.len() {
        return Err(Error::InvalidArgument(format!(
            "{} length scales for {} factors",
            theta.len(),
            kinds.len()
        )));
    }
    if theta.iter().any(|t| !t.is_finite() || *t < 0.0) || !nugget.is_finite() || nugget < 0.0 {
        return Err(Error::InvalidArgument(
            "length scales and nugget must be finite and nonnegative".into(),
        ));
    }
    let (x, z, y_mean, y_sd) = prepare(obs, kinds, cfg)?;
    if y_sd == 0.0 {
        return Ok(degenerate_model(kinds, cfg, x, obs, y_mean));
    }
    condition(obs, kinds, cfg, x, z, y_mean, y_sd, theta, nugget)
}

fn prepare(
    obs: &ObservationSet,
    kinds: &[FactorKind],
    cfg: &GpConfig,
) -> Result<(Vec<Vec<usize>>, Vec<f64>, f64, f64)> {
    if obs.n() == 0 {
        return Err(Error::EmptyData("no observations".into()));
    }
    if kinds.len() != obs.p() {
        return Err(Error::InvalidArgument(format!(
            "{} factor kinds for {} factors",
            kinds.len(),
            obs.p()
        )));
    }
    if let Some(values) = &cfg.ordinal_values {
        if values.len() != obs.p() {
            return Err(Error::InvalidArgument(format!(
                "{} coordinate lists for {} factors",
                values.len(),
                obs.p()
            )));
        }
        for (l, (vals, &nl)) in values.iter().zip(obs.design.profile()).enumerate() {
            if vals.len() != nl {
                return Err(Error::InvalidArgument(format!(
                    "factor {}: {} coordinates for {} levels",
                    l + 1,
                    vals.len(),
                    nl
                )));
            }
        }
    }
    let x = obs.design.runs().to_vec();
    let n = obs.n();
    let y_mean = obs.y.iter().sum::<f64>() / n as f64;
    let var = obs.y.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / n as f64;
    let y_sd = if var.sqrt() < 1e-12 { 0.0 } else { var.sqrt() };
    let z = if y_sd == 0.0 {
        vec![0.0; n]
    } else {
        obs.y.iter().map(|v| (v - y_mean) / y_sd).collect()
    };
    Ok((x, z, y_mean, y_sd))
}

fn degenerate_model(
    kinds: &[FactorKind],
    cfg: &GpConfig,
    x: Vec<Vec<usize>>,
    obs: &ObservationSet,
    y_mean: f64,
) -> GpModel {
    GpModel {
        kinds: kinds.to_vec(),
        ordinal_values: cfg.ordinal_values.clone(),
        x,
        y_raw: obs.y.clone(),
        y_mean,
        y_sd: 1.0,
        mean_z: 0.0,
        sigma2_z: SIGMA2_FLOOR,
        theta: vec![0.0; kinds.len()],
        g: NUGGET_FLOOR,
        jitter: 0.0,
        chol: None,
        alpha: DVector::zeros(0),
        log_lik: 0.0,
        start_log_liks: Vec::new(),
        degenerate: true,
    }
}

/// Per-pair distance contributions, one p-vector per (i, j) pair.
fn pair_distances(
    x: &[Vec<usize>],
    kinds: &[FactorKind],
    values: Option<&[Vec<f64>]>,
) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut dv = vec![Vec::new(); n * n];
    for i in 0..n {
        for j in 0..i {
            let d = factor_distances(&x[i], &x[j], kinds, values);
            dv[i * n + j] = d.clone();
            dv[j * n + i] = d;
        }
        dv[i * n + i] = vec![0.0; kinds.len()];
    }
    dv
}

fn factor_distances(
    a: &[usize],
    b: &[usize],
    kinds: &[FactorKind],
    values: Option<&[Vec<f64>]>,
) -> Vec<f64> {
    kinds
        .iter()
        .enumerate()
        .map(|(l, kind)| match kind {
            FactorKind::Ordinal => {
                let (u, v) = match values {
                    Some(vals) => (vals[l][a[l] - 1], vals[l][b[l] - 1]),
                    None => (a[l] as f64, b[l] as f64),
                };
                (u - v) * (u - v)
            }
            FactorKind::Nominal => {
                if a[l] == b[l] {
                    0.0
                } else {
                    1.0
                }
            }
        })
        .collect()
}

fn correlation_matrix(dv: &[Vec<f64>], n: usize, theta: &[f64], g: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        let e: f64 = dv[i * n + j].iter().zip(theta).map(|(d, t)| d * t).sum();
        (-e).exp() + if i == j { g } else { 0.0 }
    })
}

/// Negative profile log likelihood, None when the covariance cannot be
/// factorized at these parameters.
fn profile_nll(dv: &[Vec<f64>], z: &[f64], theta: &[f64], g: f64) -> Option<f64> {
    let n = z.len();
    let c = correlation_matrix(dv, n, theta, g);
    let chol = Cholesky::new(c)?;
    let zv = DVector::from_row_slice(z);
    let ones = DVector::from_element(n, 1.0);
    let ci_z = chol.solve(&zv);
    let ci_1 = chol.solve(&ones);
    let denom = ones.dot(&ci_1);
    if denom <= 0.0 {
        return None;
    }
    let mu = ones.dot(&ci_z) / denom;
    let r = &zv - &ones * mu;
    let sigma2 = (r.dot(&chol.solve(&r)) / n as f64).max(SIGMA2_FLOOR);
    let log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
    Some(n as f64 * sigma2.ln() + log_det)
}

#[allow(clippy::too_many_arguments)]
fn condition(
    obs: &ObservationSet,
    kinds: &[FactorKind],
    cfg: &GpConfig,
    x: Vec<Vec<usize>>,
    z: Vec<f64>,
    y_mean: f64,
    y_sd: f64,
    theta: Vec<f64>,
    g: f64,
) -> Result<GpModel> {
    let n = z.len();
    let dv = pair_distances(&x, kinds, cfg.ordinal_values.as_deref());
    let c = correlation_matrix(&dv, n, &theta, g);
    let (chol, jitter) = chol_with_jitter(&c)?;
    let zv = DVector::from_row_slice(&z);
    let ones = DVector::from_element(n, 1.0);
    let ci_z = chol.solve(&zv);
    let ci_1 = chol.solve(&ones);
    let denom = ones.dot(&ci_1);
    if denom <= 0.0 {
        return Err(Error::Numeric("profiled mean is indeterminate".into()));
    }
    let mean_z = ones.dot(&ci_z) / denom;
    let resid = &zv - &ones * mean_z;
    let alpha = chol.solve(&resid);
    let sigma2_z = (resid.dot(&alpha) / n as f64).max(SIGMA2_FLOOR);
    let log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
    let nf = n as f64;
    let log_lik =
        -0.5 * (nf * sigma2_z.ln() + log_det + nf + nf * (2.0 * std::f64::consts::PI).ln());
    Ok(GpModel {
        kinds: kinds.to_vec(),
        ordinal_values: cfg.ordinal_values.clone(),
        x,
        y_raw: obs.y.clone(),
        y_mean,
        y_sd,
        mean_z,
        sigma2_z,
        theta,
        g,
        jitter,
        chol: Some(chol),
        alpha,
        log_lik,
        start_log_liks: Vec::new(),
        degenerate: false,
    })
}

/// Cholesky with escalating diagonal jitter; reports what was added.
fn chol_with_jitter(c: &DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64)> {
    if let Some(ch) = Cholesky::new(c.clone()) {
        return Ok((ch, 0.0));
    }
    let mut jitter = JITTER_LO;
    while jitter <= JITTER_HI {
        let mut cj = c.clone();
        for i in 0..cj.nrows() {
            cj[(i, i)] += jitter;
        }
        if let Some(ch) = Cholesky::new(cj) {
            return Ok((ch, jitter));
        }
        jitter *= 10.0;
    }
    let diag_min = c.diagonal().min();
    let diag_max = c.diagonal().max();
    Err(Error::Numeric(format!(
        "covariance not positive definite even with jitter {} (diagonal range {}..{})",
        JITTER_HI, diag_min, diag_max
    )))
}

impl GpModel {
    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn kinds(&self) -> &[FactorKind] {
        &self.kinds
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Amplitude in response units.
    pub fn sigma2(&self) -> f64 {
        self.sigma2_z * self.y_sd * self.y_sd
    }

    /// Noise variance in response units.
    pub fn nugget(&self) -> f64 {
        self.g * self.sigma2()
    }

    /// Jitter the factorization needed, 0 for a clean factorization.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn log_lik(&self) -> f64 {
        self.log_lik
    }

    /// Log likelihood at each multi-start initialization; the fit
    /// never returns parameters below any of these.
    pub fn start_log_liks(&self) -> &[f64] {
        &self.start_log_liks
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Smallest training response.
    pub fn incumbent(&self) -> f64 {
        self.y_raw.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Kernel value between two settings, in response units.
    pub fn covariance(&self, a: &Setting, b: &Setting) -> f64 {
        self.sigma2() * self.correlation(&a.levels, &b.levels)
    }

    fn correlation(&self, a: &[usize], b: &[usize]) -> f64 {
        let d = factor_distances(a, b, &self.kinds, self.ordinal_values.as_deref());
        let e: f64 = d.iter().zip(&self.theta).map(|(d, t)| d * t).sum();
        (-e).exp()
    }

    /// Conditional mean and standard deviation at `s`, response units.
    /// With a zero nugget a training setting returns its observed
    /// response with zero spread: the conditional law there is a point
    /// mass, and the factorized path would only reproduce it up to
    /// jitter noise.
    pub fn posterior(&self, s: &Setting) -> Posterior {
        if self.degenerate {
            return Posterior { mean: self.y_mean, sd: 0.0 };
        }
        if self.g == 0.0 {
            if let Some(i) = self.x.iter().position(|r| r.as_slice() == s.levels.as_slice()) {
                return Posterior { mean: self.y_raw[i], sd: 0.0 };
            }
        }
        let chol = self.chol.as_ref().expect("non-degenerate model is factorized");
        let n = self.n();
        let k = DVector::from_fn(n, |i, _| self.correlation(&self.x[i], &s.levels));
        let mean_z = self.mean_z + k.dot(&self.alpha);
        let var_z = self.sigma2_z * (1.0 - k.dot(&chol.solve(&k))).max(0.0);
        Posterior {
            mean: self.y_mean + self.y_sd * mean_z,
            sd: self.y_sd * var_z.sqrt(),
        }
    }

    /// Expected improvement below `best` at `s`.
    pub fn expected_improvement(&self, s: &Setting, best: f64) -> f64 {
        let post = self.posterior(s);
        ei_value(post.mean, post.sd, best)
    }

    /// Greedy constant-liar batch of up to `q` distinct settings: each
    /// pick maximizes expected improvement, is imputed the incumbent
    /// response, and the posterior (not the hyperparameters) is
    /// reconditioned before the next pick. Training settings and
    /// earlier picks are excluded.
    pub fn select_batch(
        &self,
        space: &FactorSpace,
        q: usize,
        seed: u64,
    ) -> Result<BatchSelection> {
        if space.p() != self.kinds.len() {
            return Err(Error::InvalidArgument(format!(
                "{}-factor space for a {}-factor model",
                space.p(),
                self.kinds.len()
            )));
        }
        let candidates = candidate_pool(space, self.candidate_cap_hint(), seed)?;
        let mut used: std::collections::HashSet<Vec<usize>> =
            self.x.iter().cloned().collect();
        let liar = self.incumbent();
        let mut working = self.clone();
        let mut settings = Vec::with_capacity(q);
        let mut exhausted = false;
        for _ in 0..q {
            let mut pick: Option<(usize, f64)> = None;
            for (idx, cand) in candidates.iter().enumerate() {
                if used.contains(cand) {
                    continue;
                }
                let ei = working.expected_improvement(&Setting::new(cand.clone()), liar);
                // strict improvement keeps the earliest (lexicographically
                // smallest) candidate on ties
                if pick.map_or(true, |(_, best)| ei > best) {
                    pick = Some((idx, ei));
                }
            }
            let Some((idx, _)) = pick else {
                exhausted = true;
                break;
            };
            let chosen = candidates[idx].clone();
            used.insert(chosen.clone());
            settings.push(Setting::new(chosen.clone()));
            working = working.with_extra_point(chosen, liar)?;
        }
        Ok(BatchSelection { settings, exhausted })
    }

    fn candidate_cap_hint(&self) -> usize {
        // the fit captured no cap; keep the documented default
        GpConfig::default().candidate_cap
    }

    /// Reconditions on the training data plus one imputed point,
    /// keeping every hyperparameter (and the standardization) fixed.
    fn with_extra_point(&self, levels: Vec<usize>, y: f64) -> Result<GpModel> {
        let mut x = self.x.clone();
        x.push(levels);
        let mut y_raw = self.y_raw.clone();
        y_raw.push(y);
        let n = x.len();
        let z: Vec<f64> = y_raw.iter().map(|v| (v - self.y_mean) / self.y_sd).collect();
        let dv = pair_distances(&x, &self.kinds, self.ordinal_values.as_deref());
        let c = correlation_matrix(&dv, n, &self.theta, self.g);
        let (chol, jitter) = chol_with_jitter(&c)?;
        let zv = DVector::from_row_slice(&z);
        let ones = DVector::from_element(n, 1.0);
        let resid = &zv - &ones * self.mean_z;
        let alpha = chol.solve(&resid);
        Ok(GpModel {
            x,
            y_raw,
            jitter,
            chol: Some(chol),
            alpha,
            ..self.clone()
        })
    }
}

/// Candidate pool: full lexicographic enumeration when the space fits
/// under `cap`, otherwise `cap` uniform draws (deduplicated, sorted).
fn candidate_pool(space: &FactorSpace, cap: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if let Some(card) = space.cardinality() {
        if card <= cap as u64 {
            return Ok(space.enumerate(None)?.map(|s| s.levels).collect());
        }
    }
    let profile = space.profile();
    let mut rng = rng_from_seed(mix_seed(seed, &[0xCA9D]));
    let mut pool: std::collections::HashSet<Vec<usize>> = std::collections::HashSet::new();
    for _ in 0..cap {
        let row: Vec<usize> = profile.iter().map(|&nl| rng.gen_range(1..=nl)).collect();
        pool.insert(row);
    }
    let mut out: Vec<Vec<usize>> = pool.into_iter().collect();
    out.sort();
    Ok(out)
}

/// Expected improvement below `best` for a Gaussian with the given
/// moments; the deterministic limit max(best - mean, 0) when sd = 0.
pub fn ei_value(mean: f64, sd: f64, best: f64) -> f64 {
    if sd <= 0.0 {
        return (best - mean).max(0.0);
    }
    let u = (best - mean) / sd;
    let phi = (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let cdf = 0.5 * libm::erfc(-u / std::f64::consts::SQRT_2);
    ((best - mean) * cdf + sd * phi).max(0.0)
}

/// Nelder-Mead on a box: candidate points are projected onto the
/// bounds. Returns the best vertex after at most `iters` iterations.
fn nelder_mead(
    f: &impl Fn(&[f64]) -> f64,
    start: &[f64],
    lo: &[f64],
    hi: &[f64],
    iters: usize,
) -> (Vec<f64>, f64) {
    let dims = start.len();
    let project = |x: &mut Vec<f64>| {
        for d in 0..dims {
            x[d] = x[d].clamp(lo[d], hi[d]);
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dims + 1);
    let mut x0 = start.to_vec();
    project(&mut x0);
    simplex.push((x0.clone(), f(&x0)));
    for d in 0..dims {
        let mut x = x0.clone();
        x[d] += 0.5;
        project(&mut x);
        simplex.push((x.clone(), f(&x)));
    }
    for _ in 0..iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[dims].1 - simplex[0].1 < 1e-12 {
            break;
        }
        let centroid: Vec<f64> = (0..dims)
            .map(|d| simplex[..dims].iter().map(|(x, _)| x[d]).sum::<f64>() / dims as f64)
            .collect();
        let shifted = |w: f64| -> (Vec<f64>, f64) {
            let mut x: Vec<f64> = (0..dims)
                .map(|d| centroid[d] + w * (centroid[d] - simplex[dims].0[d]))
                .collect();
            project(&mut x);
            let v = f(&x);
            (x, v)
        };
        let refl = shifted(1.0);
        if refl.1 < simplex[0].1 {
            let exp = shifted(2.0);
            simplex[dims] = if exp.1 < refl.1 { exp } else { refl };
        } else if refl.1 < simplex[dims - 1].1 {
            simplex[dims] = refl;
        } else {
            let contr = if refl.1 < simplex[dims].1 { shifted(0.5) } else { shifted(-0.5) };
            if contr.1 < simplex[dims].1.min(refl.1) {
                simplex[dims] = contr;
            } else {
                // shrink toward the best vertex
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    for d in 0..dims {
                        v.0[d] = best[d] + 0.5 * (v.0[d] - best[d]);
                    }
                    v.1 = f(&v.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}
