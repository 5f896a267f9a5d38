//! Adaptive sampling algorithms for estimating the mean of a k-class outcome
//! under a hard label budget.
//!
//! The crate provides:
//!
//! - finite labeled pools with a budget-metered label oracle ([`pool`]),
//! - synthetic data-generating processes with analytic ground truth ([`dgp`]),
//! - stratification schemes over a 1-D covariate and the weighted
//!   group-mean estimators built on them ([`scheme`], [`estimate`]),
//! - the WarmStart-UCB adaptive stratified sampler ([`ucb`]),
//! - stage-1 active learners that induce a stratification from a classifier
//!   ([`stage1`]),
//! - the two-stage PartiBandits estimator combining both ([`partibandits`]),
//! - reference baselines: simple random sampling, proportional stratified
//!   sampling, and Beta-Bernoulli Thompson sampling ([`baselines`]).
//!
//! Everything here is deterministic given a seed: pools, samplers and
//! learners draw from caller-supplied ChaCha streams and never touch global
//! RNG state. The crate is `no_std`-compatible (with `alloc`) when built
//! without the default `std` feature; all float math goes through [`math`],
//! which falls back to `libm` on `no_std` targets.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod baselines;
pub mod dgp;
pub mod error;
pub mod estimate;
pub mod math;
pub mod partibandits;
pub mod pool;
pub mod scheme;
pub mod seeding;
pub mod stage1;
pub mod trace;
pub mod ucb;

pub use error::{Error, Result};
pub use estimate::{GroupState, GroupSummary, MeanEstimate};
pub use pool::{LabelOracle, LabeledPool};
pub use scheme::{Interval, Provenance, StratificationScheme, Stratum};
pub use trace::{SamplerTrace, TraceRow};
