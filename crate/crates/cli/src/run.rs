//! The benchmark runner: races the configured methods over seeded
//! replications and reduces everything to raw rows, summary rows, and
//! a manifest. Replication r always derives its randomness from
//! base_seed + r, so the runner is deterministic no matter how rayon
//! schedules the work.
//!
//! Every method inside one replication shares the same initial design
//! (cut from a throwaway session with the replication seed), which
//! keeps the comparison about the methods rather than the starting
//! arrays.

use anyhow::{Context, Result};
use atm_core::gp::{fit, GpConfig};
use atm_core::oa::{smallest_oa, OaRequest};
use atm_core::rng::mix_seed;
use atm_core::sel::{SelMethod, SelState};
use atm_core::space::{Design, FactorSpace, ObservationSet, Provenance, Setting};
use atm_core::stats::{predict_am, predict_atm, predict_pw, AlphaVector};
use atm_core::testbed::DiscretizedObjective;
use atm_core::tuner::TuneConfig;
use rayon::prelude::*;
use std::time::Instant;

use crate::spec::{EiKernel, Method, ValidSpec};

/// One (method, stage, replication) outcome.
#[derive(Debug, Clone)]
pub struct RawRecord {
    pub method: String,
    pub stage: usize,
    pub rep: usize,
    /// Cumulative true-objective evaluations, from the eval counter.
    pub n: u64,
    /// Noiseless objective value at the predicted setting.
    pub pred_f: f64,
    /// Dash-joined level indices.
    pub pred_setting: String,
    /// Dash-joined tail fractions, empty when the method has none.
    pub alpha_vec: String,
    /// Wall time this stage cost, milliseconds.
    pub wall_ms: u128,
}

/// Aggregate over replications for one (method, stage).
#[derive(Debug, Clone)]
pub struct SummaryRecord {
    pub method: String,
    pub stage: usize,
    /// Successful replications contributing to the statistics.
    pub reps: usize,
    /// Failed replications for this method (all stages lost).
    pub failures: usize,
    pub mean_n: f64,
    pub mean_f: f64,
    pub median_f: f64,
    pub total_wall_ms: u128,
}

/// A replication that errored; the run carries on without it.
#[derive(Debug, Clone)]
pub struct Failure {
    pub method: String,
    pub rep: usize,
    pub message: String,
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub raw: Vec<RawRecord>,
    pub summary: Vec<SummaryRecord>,
    pub failures: Vec<Failure>,
}

pub fn run_experiment(spec: &ValidSpec) -> Result<ExperimentOutput> {
    let space = FactorSpace::from_profile(&spec.profile)
        .context("objective profile")?;
    let per_rep: Vec<(Vec<(usize, RawRecord)>, Vec<Failure>)> = (0..spec.raw.replications)
        .into_par_iter()
        .map(|rep| run_replication(spec, &space, rep))
        .collect();

    let mut raw_tagged = Vec::new();
    let mut failures = Vec::new();
    for (records, fails) in per_rep {
        raw_tagged.extend(records);
        failures.extend(fails);
    }
    raw_tagged.sort_by_key(|(mi, r)| (*mi, r.rep, r.stage));
    let raw: Vec<RawRecord> = raw_tagged.into_iter().map(|(_, r)| r).collect();
    let summary = summarize(spec, &raw, &failures);
    Ok(ExperimentOutput { raw, summary, failures })
}

fn run_replication(
    spec: &ValidSpec,
    space: &FactorSpace,
    rep: usize,
) -> (Vec<(usize, RawRecord)>, Vec<Failure>) {
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (mi, method) in spec.methods.iter().enumerate() {
        match run_method(spec, space, *method, rep) {
            Ok(rows) => records.extend(rows.into_iter().map(|r| (mi, r))),
            Err(e) => failures.push(Failure {
                method: method.to_string(),
                rep,
                message: format!("{:#}", e).replace('\n', "; "),
            }),
        }
    }
    (records, failures)
}

fn run_method(
    spec: &ValidSpec,
    space: &FactorSpace,
    method: Method,
    rep: usize,
) -> Result<Vec<RawRecord>> {
    let init_seed = spec.raw.base_seed + rep as u64;
    let obj = spec.raw.objective(mix_seed(init_seed, &[0x015E]))?;
    match method {
        Method::Sel(m) => run_sel(spec, space, &obj, m, init_seed, rep),
        Method::Ei(k) => run_ei(spec, space, &obj, k, init_seed, rep),
        Method::Am | Method::Pw | Method::AtmFixed(_) => {
            run_single(spec, space, &obj, method, init_seed, rep)
        }
    }
}

/// Fresh session seeded for this replication; also the supplier of
/// the shared initial design for the one-shot and surrogate methods.
fn new_session(spec: &ValidSpec, space: &FactorSpace, init_seed: u64) -> Result<SelState> {
    Ok(SelState::new(space.clone(), init_seed)
        .with_stage_copies(spec.raw.augment.clone())?)
}

fn run_single(
    spec: &ValidSpec,
    space: &FactorSpace,
    obj: &DiscretizedObjective,
    method: Method,
    init_seed: u64,
    rep: usize,
) -> Result<Vec<RawRecord>> {
    let start = Instant::now();
    let (_, design) = new_session(spec, space, init_seed)?.suggest_batch()?;
    let obs = obj.evaluate_design(&design)?;
    let (setting, alpha_vec) = match method {
        Method::Am => (predict_am(&obs)?, String::new()),
        Method::Pw => (predict_pw(&obs)?, String::new()),
        Method::AtmFixed(a) => {
            let alphas = AlphaVector::uniform(a, obs.p())?;
            let s = predict_atm(&obs, &alphas)?;
            (s, alphas.to_string())
        }
        _ => unreachable!("run_single only handles one-shot methods"),
    };
    Ok(vec![RawRecord {
        method: method.to_string(),
        stage: 0,
        rep,
        n: obj.eval_count(),
        pred_f: obj.noiseless(&setting)?,
        pred_setting: setting.to_string(),
        alpha_vec,
        wall_ms: start.elapsed().as_millis(),
    }])
}

fn run_sel(
    spec: &ValidSpec,
    space: &FactorSpace,
    obj: &DiscretizedObjective,
    method: SelMethod,
    init_seed: u64,
    rep: usize,
) -> Result<Vec<RawRecord>> {
    let cfg = TuneConfig::with_seed(mix_seed(init_seed, &[0x7E11]));
    let mut state = new_session(spec, space, init_seed)?;
    let mut records = Vec::with_capacity(spec.raw.t_elim + 1);
    for t in 0..=spec.raw.t_elim {
        let start = Instant::now();
        let (next, design) = state.suggest_batch()?;
        let obs = obj.evaluate_design(&design)?;
        state = next.absorb(&obs.y)?;
        // elimination already tunes and records its prediction; only
        // the last stage needs a standalone predict call
        let (setting, alphas) = if t < spec.raw.t_elim {
            state = state.eliminate(method, &cfg)?;
            let rec = state.history().last().expect("eliminate records a stage");
            (rec.prediction.clone(), rec.alphas.clone())
        } else {
            let pred = state.predict(method, &cfg)?;
            (pred.setting, pred.alphas)
        };
        records.push(RawRecord {
            method: Method::Sel(method).to_string(),
            stage: t,
            rep,
            n: obj.eval_count(),
            pred_f: obj.noiseless(&setting)?,
            pred_setting: setting.to_string(),
            alpha_vec: alphas.to_string(),
            wall_ms: start.elapsed().as_millis(),
        });
    }
    Ok(records)
}

fn run_ei(
    spec: &ValidSpec,
    space: &FactorSpace,
    obj: &DiscretizedObjective,
    kernel: EiKernel,
    init_seed: u64,
    rep: usize,
) -> Result<Vec<RawRecord>> {
    let p = space.p();
    let kinds = kernel.kinds(&space.kinds(), p);
    let method = Method::Ei(kernel).to_string();
    let mut records = Vec::with_capacity(spec.raw.t_elim + 1);

    let start = Instant::now();
    let (_, d0) = new_session(spec, space, init_seed)?.suggest_batch()?;
    let mut acc = obj.evaluate_design(&d0)?;
    records.push(incumbent_record(&method, 0, rep, obj, &acc, start)?);

    for t in 1..=spec.raw.t_elim {
        let start = Instant::now();
        let q = ei_stage_size(spec, t)?;
        let gp_cfg = GpConfig {
            seed: mix_seed(init_seed, &[0x9E0, t as u64]),
            ..GpConfig::default()
        };
        let model = fit(&acc, &kinds, &gp_cfg).context("surrogate fit")?;
        let batch = model
            .select_batch(space, q, mix_seed(init_seed, &[0xBA7C4, t as u64]))
            .context("batch selection")?;
        if batch.settings.is_empty() {
            // nothing unseen left; later stages would repeat the same
            // incumbent, so stop recording
            break;
        }
        let runs: Vec<Vec<usize>> = batch.settings.iter().map(|s| s.levels.clone()).collect();
        let design = Design::new(
            space.profile().to_vec(),
            runs,
            Provenance::External,
            format!("ei-batch@stage{}", t),
        )?;
        acc.append(&obj.evaluate_design(&design)?)?;
        records.push(incumbent_record(&method, t, rep, obj, &acc, start)?);
    }
    Ok(records)
}

/// Improvement-based methods report the best setting observed so far.
fn incumbent_record(
    method: &str,
    stage: usize,
    rep: usize,
    obj: &DiscretizedObjective,
    acc: &ObservationSet,
    start: Instant,
) -> Result<RawRecord> {
    let setting: Setting = predict_pw(acc)?;
    Ok(RawRecord {
        method: method.to_string(),
        stage,
        rep,
        n: obj.eval_count(),
        pred_f: obj.noiseless(&setting)?,
        pred_setting: setting.to_string(),
        alpha_vec: String::new(),
        wall_ms: start.elapsed().as_millis(),
    })
}

/// Surrogate batches mirror the elimination ladder's budget: the
/// smallest array for the stage-t shrunken profile, times the stage
/// multiplier.
fn ei_stage_size(spec: &ValidSpec, t: usize) -> Result<usize> {
    let levels = spec.raw.levels - t;
    let copies = stage_copies(&spec.raw.augment, t);
    if levels < 2 {
        return Ok(copies);
    }
    let base = smallest_oa(&OaRequest::new(vec![levels; spec.profile.len()]))?;
    Ok(base.n() * copies)
}

fn stage_copies(augment: &[usize], t: usize) -> usize {
    *augment.get(t).unwrap_or_else(|| {
        augment.last().expect("validated augment is nonempty")
    })
}

fn summarize(spec: &ValidSpec, raw: &[RawRecord], failures: &[Failure]) -> Vec<SummaryRecord> {
    let mut out = Vec::new();
    for method in &spec.methods {
        let name = method.to_string();
        let failed = failures.iter().filter(|f| f.method == name).count();
        let mut stages: Vec<usize> = raw
            .iter()
            .filter(|r| r.method == name)
            .map(|r| r.stage)
            .collect();
        stages.sort_unstable();
        stages.dedup();
        for stage in stages {
            let rows: Vec<&RawRecord> = raw
                .iter()
                .filter(|r| r.method == name && r.stage == stage)
                .collect();
            let reps = rows.len();
            let mean = |f: &dyn Fn(&RawRecord) -> f64| {
                rows.iter().map(|r| f(r)).sum::<f64>() / reps as f64
            };
            out.push(SummaryRecord {
                method: name.clone(),
                stage,
                reps,
                failures: failed,
                mean_n: mean(&|r| r.n as f64),
                mean_f: mean(&|r| r.pred_f),
                median_f: median(rows.iter().map(|r| r.pred_f)),
                total_wall_ms: rows.iter().map(|r| r.wall_ms).sum(),
            });
        }
    }
    out
}

/// Median with the even-count average convention.
pub fn median(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn raw_csv(records: &[RawRecord]) -> String {
    let mut out = String::from("method,stage,rep,n,pred_f,pred_setting,alpha_vec,wall_ms\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.method, r.stage, r.rep, r.n, r.pred_f, r.pred_setting, r.alpha_vec, r.wall_ms
        ));
    }
    out
}

pub fn summary_csv(rows: &[SummaryRecord]) -> String {
    let mut out =
        String::from("method,stage,reps,failures,mean_n,mean_f,median_f,total_wall_ms\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.method, r.stage, r.reps, r.failures, r.mean_n, r.mean_f, r.median_f,
            r.total_wall_ms
        ));
    }
    out
}

/// Parses the raw CSV back into records (used to prove the summary is
/// recomputable from what was written).
#[cfg(test)]
pub fn parse_raw_csv(text: &str) -> Result<Vec<RawRecord>> {
    use anyhow::anyhow;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 8 {
            return Err(anyhow!("raw csv line {}: {} columns, want 8", i + 1, cols.len()));
        }
        out.push(RawRecord {
            method: cols[0].to_string(),
            stage: cols[1].parse().with_context(|| format!("line {}: stage", i + 1))?,
            rep: cols[2].parse().with_context(|| format!("line {}: rep", i + 1))?,
            n: cols[3].parse().with_context(|| format!("line {}: n", i + 1))?,
            pred_f: cols[4].parse().with_context(|| format!("line {}: pred_f", i + 1))?,
            pred_setting: cols[5].to_string(),
            alpha_vec: cols[6].to_string(),
            wall_ms: cols[7].parse().with_context(|| format!("line {}: wall_ms", i + 1))?,
        });
    }
    Ok(out)
}
