//! Orthogonal-array catalog, verifier, randomization, and augmentation.
//!
//! `smallest_oa` resolves a level profile to the smallest array the
//! construction set reaches, deterministically: same-level profiles walk
//! a per-level-count ladder of classical constructions; mixed profiles
//! collapse the ladder array of the largest level count (exact when
//! every target divides it, flagged nearly-orthogonal otherwise); when
//! nothing applies, a column-balanced random design is returned with
//! `Provenance::BalancedRandom`. Randomization permutes each column's
//! level labels and shuffles rows, both seeded, which preserves
//! orthogonality exactly.

mod construct;
pub mod ff;

pub use construct::balanced_random;

use crate::error::{Error, Result};
use crate::rng::{mix_seed, rng_from_seed};
use crate::space::{Design, Provenance};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

/// What to generate: a level profile, the required strength (only 2 is
/// generable), and an optional run-count ceiling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OaRequest {
    pub profile: Vec<usize>,
    pub strength: u32,
    pub max_runs: Option<usize>,
}

impl OaRequest {
    pub fn new(profile: Vec<usize>) -> Self {
        OaRequest { profile, strength: 2, max_runs: None }
    }

    pub fn with_max_runs(mut self, max_runs: usize) -> Self {
        self.max_runs = Some(max_runs);
        self
    }
}

/// Balance report from [`verify_oa`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OaReport {
    /// True when every checked count equals its ideal value exactly.
    pub ok: bool,
    pub strength: u32,
    /// Largest absolute deviation of a cell count from its ideal value.
    pub worst_imbalance: f64,
    /// Number of (column-tuple, level-tuple) cells counted.
    pub cells_checked: usize,
}

/// The smallest design the construction set offers for the profile.
///
/// Falls back to a column-balanced random design (flagged in
/// provenance) when no orthogonal array is reachable. Errors only on
/// invalid input or when `max_runs` cuts the result off.
pub fn smallest_oa(req: &OaRequest) -> Result<Design> {
    if req.profile.is_empty() {
        return Err(Error::InvalidArgument("empty profile".into()));
    }
    if let Some(&bad) = req.profile.iter().find(|&&n| n < 2) {
        return Err(Error::InvalidArgument(format!(
            "level count {} is below 2",
            bad
        )));
    }
    if req.strength != 2 {
        return Err(Error::InvalidArgument(format!(
            "only strength-2 generation is supported, got {}",
            req.strength
        )));
    }
    let p = req.profile.len();
    let q_max = *req.profile.iter().max().unwrap();
    let uniform = req.profile.iter().all(|&n| n == q_max);

    let design = if uniform {
        construct::smallest_pure(q_max, p)
    } else {
        construct::smallest_pure(q_max, p)
            .and_then(|src| construct::collapse(&src, &req.profile).ok())
    };
    let design = match design {
        Some(d) => d,
        None => {
            let n = fallback_runs(&req.profile);
            construct::balanced_random(&req.profile, n, 0)?
        }
    };
    if let Some(cap) = req.max_runs {
        if design.n() > cap {
            return Err(Error::NoArray(format!(
                "smallest design for profile {:?} needs {} runs, above the cap of {}",
                req.profile,
                design.n(),
                cap
            )));
        }
    }
    Ok(design)
}

/// Fallback size: the smallest common multiple of the level counts at
/// or above the main-effect degrees-of-freedom floor 1 + sum(N_l - 1).
fn fallback_runs(profile: &[usize]) -> usize {
    let l = profile.iter().fold(1usize, |acc, &n| lcm(acc, n));
    let floor = 1 + profile.iter().map(|&n| n - 1).sum::<usize>();
    l * floor.div_ceil(l)
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Counts level tuples over every column tuple of size `strength`
/// (1 or 2) and reports the worst deviation from perfect balance.
pub fn verify_oa(design: &Design, strength: u32) -> Result<OaReport> {
    let n = design.n() as f64;
    let profile = design.profile();
    let p = design.p();
    let mut worst: f64 = 0.0;
    let mut cells = 0usize;
    match strength {
        1 => {
            for l in 0..p {
                let mut counts = vec![0usize; profile[l]];
                for run in design.runs() {
                    counts[run[l] - 1] += 1;
                }
                let ideal = n / profile[l] as f64;
                for c in counts {
                    worst = worst.max((c as f64 - ideal).abs());
                    cells += 1;
                }
            }
        }
        2 => {
            if p < 2 {
                // a single column is checked at strength 1
                return verify_oa(design, 1).map(|r| OaReport { strength: 2, ..r });
            }
            for a in 0..p {
                for b in (a + 1)..p {
                    let mut counts = vec![0usize; profile[a] * profile[b]];
                    for run in design.runs() {
                        counts[(run[a] - 1) * profile[b] + (run[b] - 1)] += 1;
                    }
                    let ideal = n / (profile[a] * profile[b]) as f64;
                    for c in counts {
                        worst = worst.max((c as f64 - ideal).abs());
                        cells += 1;
                    }
                }
            }
        }
        s => {
            return Err(Error::InvalidArgument(format!(
                "verify_oa supports strength 1 and 2, got {}",
                s
            )))
        }
    }
    Ok(OaReport { ok: worst < 1e-9, strength, worst_imbalance: worst, cells_checked: cells })
}

/// Seeded level-label permutation per column followed by a row shuffle.
/// Balance counts are invariant, so orthogonality is preserved exactly.
pub fn randomize(design: &Design, seed: u64) -> Design {
    let mut rng = rng_from_seed(seed);
    let mut runs = design.runs().to_vec();
    for (l, &nl) in design.profile().iter().enumerate() {
        let mut perm: Vec<usize> = (1..=nl).collect();
        perm.shuffle(&mut rng);
        for run in runs.iter_mut() {
            run[l] = perm[run[l] - 1];
        }
    }
    runs.shuffle(&mut rng);
    let provenance = match design.provenance {
        Provenance::CatalogOa | Provenance::PermutedOa => Provenance::PermutedOa,
        other => other,
    };
    Design::new(
        design.profile().to_vec(),
        runs,
        provenance,
        format!("permuted({})", design.construction),
    )
    .expect("permuting levels keeps the design valid")
}

/// The design stacked with `copies - 1` independently randomized copies
/// of itself. `copies = 1` returns the design unchanged.
pub fn augment(design: &Design, copies: usize, seed: u64) -> Result<Design> {
    if copies == 0 {
        return Err(Error::InvalidArgument("augment needs copies >= 1".into()));
    }
    let mut out = design.clone();
    for c in 1..copies {
        out = out.stack(&randomize(design, mix_seed(seed, &[c as u64])))?;
    }
    Ok(out)
}
