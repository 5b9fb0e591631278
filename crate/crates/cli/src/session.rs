//! File-backed ask/tell sessions: the elimination engine behind a
//! JSON state file, so batches can be run on real experiments between
//! invocations. Every mutation rewrites the state file atomically
//! (write to a sibling temp file, then rename).

use anyhow::{bail, Context, Result};
use atm_core::sel::{SelMethod, SelState};
use atm_core::space::FactorSpace;
use atm_core::tuner::TuneConfig;
use std::fs;
use std::path::Path;

pub fn init(state: &Path, profile: &[usize], seed: u64, copies: Option<Vec<usize>>) -> Result<()> {
    if state.exists() {
        bail!(
            "state file {} already exists; pick another path or remove it first",
            state.display()
        );
    }
    let space = FactorSpace::from_profile(profile)?;
    let mut session = SelState::new(space, seed);
    if let Some(copies) = copies {
        session = session.with_stage_copies(copies)?;
    }
    save(state, &session)?;
    println!(
        "initialized: profile={} seed={} state={}",
        join(profile),
        seed,
        state.display()
    );
    Ok(())
}

/// Emits the next batch as CSV (stdout or a file). A batch that was
/// suggested but not yet observed is re-emitted unchanged instead of
/// advancing the session.
pub fn suggest(state: &Path, out: Option<&Path>) -> Result<()> {
    let session = load(state)?;
    let (design, reissued) = match session.pending() {
        Some(d) => (d.clone(), true),
        None => {
            let (next, design) = session.suggest_batch()?;
            save(state, &next)?;
            (design, false)
        }
    };
    let csv = design.to_csv();
    match out {
        Some(path) => {
            fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
            println!(
                "suggested: runs={} stage={} reissued={} batch={}",
                design.n(),
                load(state)?.stage(),
                reissued,
                path.display()
            );
        }
        None => print!("{}", csv),
    }
    Ok(())
}

/// Ingests responses for the pending batch: one number per design
/// row, in row order, optionally under a `y` header line.
pub fn observe(state: &Path, responses: &Path) -> Result<()> {
    let session = load(state)?;
    let text = fs::read_to_string(responses)
        .with_context(|| format!("reading {}", responses.display()))?;
    let y = parse_responses(&text)?;
    let next = session.absorb(&y)?;
    save(state, &next)?;
    println!("absorbed: runs={} accumulated={}", y.len(), next.accumulated().n());
    Ok(())
}

pub fn eliminate(state: &Path, method: SelMethod, tune_seed: u64) -> Result<()> {
    let session = load(state)?;
    let next = session.eliminate(method, &TuneConfig::with_seed(tune_seed))?;
    save(state, &next)?;
    let record = next.history().last().expect("eliminate records a stage");
    let removed: Vec<String> = record
        .eliminated
        .iter()
        .map(|e| match e {
            Some(level) => level.to_string(),
            None => "-".to_string(),
        })
        .collect();
    println!(
        "eliminated: stage={} removed={} surviving={} alpha={}",
        next.stage(),
        removed.join(","),
        join(&next.surviving_profile()),
        record.alphas
    );
    Ok(())
}

pub fn predict(state: &Path, method: SelMethod, tune_seed: u64) -> Result<()> {
    let session = load(state)?;
    let pred = session.predict(method, &TuneConfig::with_seed(tune_seed))?;
    let observed = pred
        .observed
        .map(|v| v.to_string())
        .unwrap_or_else(|| "NA".to_string());
    println!(
        "prediction: setting={} observed={} alpha={}",
        pred.setting, observed, pred.alphas
    );
    Ok(())
}

fn load(state: &Path) -> Result<SelState> {
    let text = fs::read_to_string(state)
        .with_context(|| format!("reading state file {}", state.display()))?;
    Ok(SelState::from_json(&text)?)
}

fn save(state: &Path, session: &SelState) -> Result<()> {
    let tmp = state.with_extension("json.tmp");
    fs::write(&tmp, session.to_json())
        .with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, state).with_context(|| format!("renaming onto {}", state.display()))?;
    Ok(())
}

fn parse_responses(text: &str) -> Result<Vec<f64>> {
    let mut y = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.eq_ignore_ascii_case("y")) {
            continue;
        }
        y.push(
            line.parse::<f64>()
                .with_context(|| format!("responses line {}: {:?}", i + 1, line))?,
        );
    }
    if y.is_empty() {
        bail!("responses file has no values");
    }
    Ok(y)
}

fn join(profile: &[usize]) -> String {
    profile
        .iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join("-")
}
