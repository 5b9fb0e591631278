//! `atm`: tail-mean predictors, sequential level elimination, and a
//! benchmark harness for discrete black-box optimization, all behind
//! one binary. Commands print machine-parsable single lines; every
//! failure exits nonzero with one `atm: error: ...` line on stderr.
//! File formats are documented in docs/formats.md.

mod run;
mod session;
mod spec;

use anyhow::{bail, Context, Result};
use atm_core::oa::{randomize, smallest_oa, verify_oa, OaRequest};
use atm_core::sel::SelMethod;
use atm_core::space::{Design, ObservationSet};
use atm_core::testbed::{brute_force, builtin, discretize};
use atm_core::tuner::{tune_alpha, TuneConfig};
use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "atm",
    version,
    about = "Robust discrete optimization: tail-mean predictors, level elimination, benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Benchmark experiments from a spec file
    Bench {
        #[command(subcommand)]
        cmd: BenchCmd,
    },
    /// Orthogonal array generation and verification
    Oa {
        #[command(subcommand)]
        cmd: OaCmd,
    },
    /// Exhaustive noiseless minimum of a built-in objective
    Oracle {
        /// friedman, detpep10, detpep10e, camel6, or shubert
        objective: String,
        /// Dimension, for objectives that take one
        #[arg(long)]
        p: Option<usize>,
        /// Levels per factor
        #[arg(long)]
        levels: usize,
        /// Refuse grids with more settings than this
        #[arg(long, default_value_t = 10_000_000)]
        cap: u64,
    },
    /// Ask/tell elimination sessions against a state file
    Session {
        #[command(subcommand)]
        cmd: SessionCmd,
    },
    /// Tune the tail-fraction vector on an observation CSV
    TuneAlpha {
        /// Observations: f1,...,fp,y rows
        obs: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write per-candidate scores to this CSV
        #[arg(long)]
        diagnostics: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BenchCmd {
    /// Run the experiment described by a TOML spec file
    Run { spec: PathBuf },
}

#[derive(Subcommand)]
enum OaCmd {
    /// Emit the smallest catalog array for a profile as CSV
    Gen {
        /// Profile: uniform like 4^9, or per-factor like 3,4,2
        #[arg(long)]
        profile: String,
        /// Shuffle rows, columns, and level labels
        #[arg(long)]
        seed: Option<u64>,
        /// Destination file (stdout when absent)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a design CSV for balance at the given strength
    Verify {
        file: PathBuf,
        #[arg(long, default_value_t = 2)]
        strength: u32,
    },
}

#[derive(Subcommand)]
enum SessionCmd {
    /// Create a fresh session state file
    Init {
        #[arg(long)]
        state: PathBuf,
        /// Profile: uniform like 4^9, or per-factor like 3,4,2
        #[arg(long)]
        profile: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-stage design-size multipliers, e.g. 2,1
        #[arg(long)]
        copies: Option<String>,
    },
    /// Emit the next batch (re-emits an unanswered one)
    Suggest {
        #[arg(long)]
        state: PathBuf,
        /// Destination file (stdout when absent)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ingest responses for the pending batch
    Observe {
        #[arg(long)]
        state: PathBuf,
        /// One response per design row, in row order
        #[arg(long)]
        responses: PathBuf,
    },
    /// Drop each factor's worst surviving level
    Eliminate {
        #[arg(long)]
        state: PathBuf,
        /// atm, mean, or min
        #[arg(long)]
        method: String,
        #[arg(long, default_value_t = 0)]
        tune_seed: u64,
    },
    /// Report the current best-setting prediction
    Predict {
        #[arg(long)]
        state: PathBuf,
        /// atm, mean, or min
        #[arg(long)]
        method: String,
        #[arg(long, default_value_t = 0)]
        tune_seed: u64,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("atm: error: {}", format!("{:#}", e).replace('\n', "; "));
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Bench { cmd: BenchCmd::Run { spec } } => bench_run(&spec),
        Cmd::Oa { cmd } => match cmd {
            OaCmd::Gen { profile, seed, out } => oa_gen(&profile, seed, out.as_deref()),
            OaCmd::Verify { file, strength } => oa_verify(&file, strength),
        },
        Cmd::Oracle { objective, p, levels, cap } => oracle(&objective, p, levels, cap),
        Cmd::Session { cmd } => match cmd {
            SessionCmd::Init { state, profile, seed, copies } => {
                let profile = parse_profile(&profile)?;
                let copies = copies.map(|c| parse_usize_list(&c, "copies")).transpose()?;
                session::init(&state, &profile, seed, copies)
            }
            SessionCmd::Suggest { state, out } => session::suggest(&state, out.as_deref()),
            SessionCmd::Observe { state, responses } => session::observe(&state, &responses),
            SessionCmd::Eliminate { state, method, tune_seed } => {
                session::eliminate(&state, parse_sel_method(&method)?, tune_seed)
            }
            SessionCmd::Predict { state, method, tune_seed } => {
                session::predict(&state, parse_sel_method(&method)?, tune_seed)
            }
        },
        Cmd::TuneAlpha { obs, seed, diagnostics } => cmd_tune_alpha(&obs, seed, diagnostics.as_deref()),
    }
}

fn bench_run(path: &Path) -> Result<()> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading spec {}", path.display()))?;
    let valid = spec::ExperimentSpec::parse(&text)?.validate()?;
    let out = run::run_experiment(&valid)?;

    let dir = &valid.raw.out_dir;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let raw_text = run::raw_csv(&out.raw);
    let summary_text = run::summary_csv(&out.summary);
    fs::write(dir.join("raw.csv"), &raw_text)?;
    fs::write(dir.join("summary.csv"), &summary_text)?;

    let manifest = serde_json::json!({
        "spec_file": path.display().to_string(),
        "spec_sha256": sha256_hex(text.as_bytes()),
        "toolkit_version": env!("CARGO_PKG_VERSION"),
        "objective": {
            "name": valid.raw.objective,
            "p": valid.raw.p,
            "levels": valid.raw.levels,
            "noise_sd": valid.raw.noise_sd,
        },
        "methods": valid.methods.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
        "t_elim": valid.raw.t_elim,
        "replications": valid.raw.replications,
        "base_seed": valid.raw.base_seed,
        "augment": valid.raw.augment,
        "outputs": {
            "raw": {
                "path": "raw.csv",
                "sha256": sha256_hex(raw_text.as_bytes()),
                "rows": out.raw.len(),
            },
            "summary": {
                "path": "summary.csv",
                "sha256": sha256_hex(summary_text.as_bytes()),
                "rows": out.summary.len(),
            },
        },
        "failures": out.failures.iter().map(|f| serde_json::json!({
            "method": f.method, "rep": f.rep, "message": f.message,
        })).collect::<Vec<_>>(),
    });
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest always serializes"),
    )?;

    println!(
        "{:<14} {:>5} {:>5} {:>8} {:>10} {:>12} {:>12}",
        "method", "stage", "reps", "failures", "mean_n", "mean_f", "median_f"
    );
    for s in &out.summary {
        println!(
            "{:<14} {:>5} {:>5} {:>8} {:>10.1} {:>12.6} {:>12.6}",
            s.method, s.stage, s.reps, s.failures, s.mean_n, s.mean_f, s.median_f
        );
    }
    println!(
        "wrote raw.csv, summary.csv, manifest.json to {} ({} failures)",
        dir.display(),
        out.failures.len()
    );
    Ok(())
}

fn oa_gen(profile: &str, seed: Option<u64>, out: Option<&Path>) -> Result<()> {
    let profile = parse_profile(profile)?;
    let mut design = smallest_oa(&OaRequest::new(profile))?;
    if let Some(seed) = seed {
        design = randomize(&design, seed);
    }
    let csv = design.to_csv();
    match out {
        Some(path) => {
            fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {} runs to {}", design.n(), path.display());
        }
        None => print!("{}", csv),
    }
    Ok(())
}

fn oa_verify(file: &Path, strength: u32) -> Result<()> {
    let text =
        fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let design = Design::from_csv(&text, None)?;
    let report = verify_oa(&design, strength)?;
    if !report.ok {
        bail!(
            "{}: imbalanced at strength {} (worst deviation {}, {} cells checked)",
            file.display(),
            strength,
            report.worst_imbalance,
            report.cells_checked
        );
    }
    println!(
        "ok: strength={} runs={} factors={} cells_checked={}",
        report.strength,
        design.n(),
        design.p(),
        report.cells_checked
    );
    Ok(())
}

fn oracle(objective: &str, p: Option<usize>, levels: usize, cap: u64) -> Result<()> {
    let f = builtin(objective, p)?;
    let obj = discretize(&f, levels)?;
    let best = brute_force(&obj, Some(cap))?;
    println!("min={} setting={}", best.value, best.setting);
    Ok(())
}

fn cmd_tune_alpha(obs_path: &Path, seed: u64, diagnostics: Option<&Path>) -> Result<()> {
    let text = fs::read_to_string(obs_path)
        .with_context(|| format!("reading {}", obs_path.display()))?;
    let obs = ObservationSet::from_csv(&text, None)?;
    let out = tune_alpha(&obs, &TuneConfig::with_seed(seed))?;
    println!(
        "alpha={} synthetic_runs={} interaction_strength={}",
        out.alphas,
        out.synthetic_runs,
        atm_core::heredity::interaction_strength(&out.surrogate)
    );
    if let Some(path) = diagnostics {
        fs::write(path, out.diagnostics_csv())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn parse_sel_method(s: &str) -> Result<SelMethod> {
    s.parse::<SelMethod>()
        .map_err(|_| anyhow::anyhow!("method must be atm, mean, or min, got {:?}", s))
}

/// Profile grammar: `4^9` (uniform) or `3,4,2` (per factor).
fn parse_profile(s: &str) -> Result<Vec<usize>> {
    if let Some((levels, count)) = s.split_once('^') {
        let levels: usize = levels
            .parse()
            .with_context(|| format!("profile {:?}: bad level count", s))?;
        let count: usize = count
            .parse()
            .with_context(|| format!("profile {:?}: bad factor count", s))?;
        if count == 0 {
            bail!("profile {:?}: needs at least one factor", s);
        }
        return Ok(vec![levels; count]);
    }
    parse_usize_list(s, "profile")
}

fn parse_usize_list(s: &str, what: &str) -> Result<Vec<usize>> {
    let items: Vec<usize> = s
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .with_context(|| format!("{} {:?}: bad entry {:?}", what, s, tok))
        })
        .collect::<Result<_>>()?;
    if items.is_empty() {
        bail!("{} {:?}: empty list", what, s);
    }
    Ok(items)
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{:02x}", b)).collect()
}
