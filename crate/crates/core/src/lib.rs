//! Robust discrete black-box optimization over factorial spaces.
//!
//! This crate optimizes expensive black-box functions whose inputs are
//! factors taking a small number of discrete levels (process knobs,
//! material choices, categorical switches). The budget is assumed to be
//! far too small to visit more than a sliver of the full factorial, so
//! everything is built around balanced fractional designs and marginal
//! statistics that remain meaningful on a handful of runs.
//!
//! The pieces, bottom to top:
//!
//! * [`space`] - factor spaces, settings, designs, observation sets, and
//!   their CSV forms.
//! * [`oa`] - an orthogonal-array catalog built from classical
//!   constructions (Hadamard, difference schemes, linear arrays), with a
//!   verifier, seeded randomization, and augmentation.
//! * [`stats`] - marginal tail means and the predictors derived from
//!   them. The tail mean of level x of factor l averages the lowest
//!   ceil(m*alpha) responses observed at that level; the ATM predictor
//!   picks, per factor, the level with the smallest tail mean. alpha = 1
//!   recovers the plain marginal-mean predictor (AM), alpha = 0 the
//!   pick-the-winner rule (PW).
//! * [`heredity`] - a sparse second-order surrogate (two-stage L1 with
//!   weak heredity) used to tune the tail fractions from data.
//! * [`tuner`] - data-driven selection of the per-factor alpha vector by
//!   replaying candidate predictors on a synthetic design scored by the
//!   surrogate. Never touches the real objective.
//! * [`sel`] - sequential elimination of levels: an ask/tell engine that
//!   alternates balanced batches with per-factor removal of the worst
//!   level, shrinking the factorial between batches.
//! * [`gp`] - Gaussian-process regression on discrete factors (ordinal,
//!   nominal, or mixed correlation) with expected improvement and greedy
//!   batch selection, used as a baseline.
//! * [`testbed`] - discretized synthetic objectives, noise wrappers, a
//!   brute-force oracle, and a monotonicity checker for ground-truth
//!   experiments.
//!
//! Levels are 1-based consecutive integers everywhere; factor indices are
//! 0-based in the API and rendered 1-based (`f1..fp`) in file formats.
//! Every randomized operation takes an explicit seed and is reproducible
//! bit for bit.

pub mod error;
pub mod gp;
pub mod heredity;
pub mod oa;
pub mod rng;
pub mod sel;
pub mod space;
pub mod stats;
pub mod testbed;
pub mod tuner;

pub use error::{Error, Result};
pub use space::{Design, FactorKind, FactorSpace, FactorSpec, ObservationSet, Provenance, Setting};
