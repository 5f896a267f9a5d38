//! WarmStart-UCB: adaptive stratified sampling over a fixed scheme.
//!
//! The sampler first spreads a `tau` fraction of the budget evenly across
//! strata (the warm start), then pulls each round the stratum maximizing an
//! optimistic estimate of marginal variance reduction,
//! `(sigma_hat_g + C_N / sqrt(n_g)) / n_g`. Strata without a defined
//! standard deviation score infinity, so every live stratum reaches two
//! samples before finite scores take over.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::estimate::{GroupState, MeanEstimate};
use crate::math;
use crate::pool::{LabelOracle, StratumSampler};
use crate::scheme::StratificationScheme;
use crate::trace::{SamplerTrace, TraceRow};

/// Confidence-width constants of the UCB score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UcbConstants {
    pub c1: f64,
    pub c2: f64,
    pub delta: f64,
    pub budget: usize,
    /// Derived width, floored at 1.
    pub c_n: f64,
}

impl UcbConstants {
    pub fn new(delta: f64, c1: f64, c2: f64, budget: usize) -> Result<Self> {
        Ok(UcbConstants {
            c1,
            c2,
            delta,
            budget,
            c_n: compute_cn(delta, c1, c2, budget)?,
        })
    }
}

/// Evaluates the two-term confidence width
///
/// ```text
/// 2 sqrt(2 c1 ln(2/d) ln(c2/d))
///   + 2 sqrt(c1 ln(2/d) (1 + c2 + ln(c2/d))) / ((1-d) sqrt(2 ln(2/d))) / N^2
/// ```
///
/// and floors the result at 1. Tiny constants can push a square-root
/// argument negative; the floor clause covers that case too, since the
/// downstream analysis only ever relies on `C_N >= 1`.
pub fn compute_cn(delta: f64, c1: f64, c2: f64, budget: usize) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain {
            parameter: "delta",
            value: delta,
        });
    }
    let c1_ok = c1 > 0.0 && c1.is_finite();
    if !c1_ok {
        return Err(Error::Domain {
            parameter: "c1",
            value: c1,
        });
    }
    let c2_ok = c2 > 0.0 && c2.is_finite();
    if !c2_ok {
        return Err(Error::Domain {
            parameter: "c2",
            value: c2,
        });
    }
    if budget == 0 {
        return Err(Error::Domain {
            parameter: "N",
            value: 0.0,
        });
    }
    let log_2d = math::ln(2.0 / delta);
    let log_c2d = math::ln(c2 / delta);
    let n2 = (budget as f64) * (budget as f64);
    let first = 2.0 * math::sqrt(2.0 * c1 * log_2d * log_c2d);
    let second =
        2.0 * math::sqrt(c1 * log_2d * (1.0 + c2 + log_c2d)) / ((1.0 - delta) * math::sqrt(2.0 * log_2d)) / n2;
    let raw = first + second;
    if raw.is_nan() {
        return Ok(1.0);
    }
    Ok(raw.max(1.0))
}

/// Warm-start allocation: `floor(tau * N / G)` labels per stratum before
/// UCB selection begins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarmStartPlan {
    pub tau: f64,
    pub per_group_floor: usize,
}

impl WarmStartPlan {
    pub fn new(tau: f64, budget: usize, groups: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::Domain {
                parameter: "tau",
                value: tau,
            });
        }
        if groups == 0 {
            return Err(Error::EmptyScheme);
        }
        let per_group_floor = math::floor(tau * budget as f64 / groups as f64) as usize;
        Ok(WarmStartPlan {
            tau,
            per_group_floor,
        })
    }
}

/// UCB selection score of one stratum. Undefined statistics (fewer than two
/// samples) score infinity, matching the sampler's initialization.
pub fn ucb_score(state: &GroupState, consts: &UcbConstants) -> f64 {
    let n = state.n();
    match state.weighted_std() {
        Some(sd) if n >= 2 => (sd + consts.c_n / math::sqrt(n as f64)) / n as f64,
        _ => f64::INFINITY,
    }
}

/// Picks the next stratum.
///
/// During the warm phase (some live stratum below the floor) strata fill
/// round-robin: fewest samples first, lowest id on ties. Afterwards the
/// highest UCB score wins; infinite scores are themselves filled
/// round-robin, and finite ties break toward the lowest id.
pub fn select_group(
    states: &[GroupState],
    plan: &WarmStartPlan,
    consts: &UcbConstants,
    live: &[bool],
) -> Result<usize> {
    let round_robin = |below: usize| {
        states
            .iter()
            .enumerate()
            .filter(|(g, st)| live[*g] && st.n() < below)
            .min_by_key(|(g, st)| (st.n(), *g))
            .map(|(g, _)| g)
    };
    if plan.per_group_floor > 0 {
        if let Some(g) = round_robin(plan.per_group_floor) {
            return Ok(g);
        }
    }
    let mut best: Option<(f64, usize)> = None;
    for (g, st) in states.iter().enumerate() {
        if !live[g] {
            continue;
        }
        let score = ucb_score(st, consts);
        if best.is_none_or(|(s, _)| score > s) {
            best = Some((score, g));
        }
    }
    let (score, g) = best.ok_or(Error::AllStrataExhausted)?;
    if score == f64::INFINITY {
        // Several strata may still lack a defined std; fill them evenly.
        let g = states
            .iter()
            .enumerate()
            .filter(|(g, st)| live[*g] && ucb_score(st, consts) == f64::INFINITY)
            .min_by_key(|(g, st)| (st.n(), *g))
            .map(|(g, _)| g)
            .unwrap_or(g);
        return Ok(g);
    }
    Ok(g)
}

/// Parameters of one WarmStart-UCB run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WsUcbParams {
    pub budget: usize,
    pub delta: f64,
    pub tau: f64,
    pub c1: f64,
    pub c2: f64,
}

impl WsUcbParams {
    /// Defaults: `tau = 0.5`, `delta = 0.1`, sub-gaussian constants
    /// `max(1, (k/2)^2)` for a `{0..k}` alphabet.
    pub fn new(budget: usize, classes_minus_one: usize) -> Self {
        let k = classes_minus_one as f64;
        let c = (k / 2.0) * (k / 2.0);
        WsUcbParams {
            budget,
            delta: 0.1,
            tau: 0.5,
            c1: c.max(1.0),
            c2: c.max(1.0),
        }
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }
}

/// Runs WarmStart-UCB for `params.budget` rounds against the oracle.
///
/// Each round selects a stratum, reveals one uniformly random unrevealed
/// point of it, and updates that stratum's running mean and standard
/// deviation. Exhausted strata drop out of the candidate set; their
/// accumulated means still enter the final aggregate. The trace records
/// every reveal and the selection scores of every round.
pub fn run_warmstart_ucb(
    oracle: &mut LabelOracle<'_>,
    scheme: &StratificationScheme,
    params: WsUcbParams,
    rng: &mut (impl Rng + ?Sized),
) -> Result<(MeanEstimate, SamplerTrace)> {
    let groups = scheme.len();
    if params.budget < groups {
        return Err(Error::InfeasibleCoverage {
            budget: params.budget,
            groups,
        });
    }
    if oracle.remaining_budget() < params.budget {
        return Err(Error::BudgetExhausted);
    }
    let consts = UcbConstants::new(params.delta, params.c1, params.c2, params.budget)?;
    let plan = WarmStartPlan::new(params.tau, params.budget, groups)?;

    let mut sampler = StratumSampler::new(oracle, scheme);
    let mut states: Vec<GroupState> = scheme
        .strata()
        .iter()
        .map(|s| GroupState::new(s.id, s.weight))
        .collect();
    let mut live: Vec<bool> = (0..groups).map(|g| sampler.remaining(g) > 0).collect();
    let mut trace = SamplerTrace::new();

    for round in 0..params.budget {
        if !live.iter().any(|&l| l) {
            break;
        }
        let scores: Vec<f64> = states.iter().map(|st| ucb_score(st, &consts)).collect();
        let g = select_group(&states, &plan, &consts, &live)?;
        let (point, label) = sampler.draw(g, oracle, rng)?;
        states[g].push(label);
        if sampler.remaining(g) == 0 {
            live[g] = false;
        }
        trace.scores.push(scores);
        trace.rows.push(TraceRow {
            round,
            group: g,
            point,
            label,
        });
    }

    let estimate = MeanEstimate::from_states(&states, 0)?;
    Ok((estimate, trace))
}
