//! Reference estimators: simple random sampling, proportional stratified
//! random sampling, and Beta-Bernoulli Thompson sampling.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};
use crate::estimate::{GroupState, GroupSummary, MeanEstimate};
use crate::pool::{LabelOracle, StratumSampler};
use crate::scheme::StratificationScheme;
use crate::trace::{SamplerTrace, TraceRow};

/// Simple random sampling: `budget` uniform draws without replacement,
/// estimate is the plain sample mean.
pub fn run_srs(
    oracle: &mut LabelOracle<'_>,
    budget: usize,
    rng: &mut (impl Rng + ?Sized),
) -> Result<(MeanEstimate, SamplerTrace)> {
    if budget == 0 {
        return Err(Error::UndefinedEstimate("mean of an empty sample"));
    }
    if oracle.pool().len() < budget {
        return Err(Error::PoolTooSmall {
            pool: oracle.pool().len(),
            budget,
        });
    }
    if oracle.remaining_budget() < budget {
        return Err(Error::BudgetExhausted);
    }
    let single = StratificationScheme::single();
    let mut sampler = StratumSampler::new(oracle, &single);
    let mut trace = SamplerTrace::new();
    let mut sum = 0.0;
    for round in 0..budget {
        let (point, label) = sampler.draw(0, oracle, rng)?;
        sum += label;
        trace.rows.push(TraceRow {
            round,
            group: 0,
            point,
            label,
        });
    }
    let mean = sum / budget as f64;
    Ok((
        MeanEstimate {
            value: mean,
            per_group: alloc::vec![GroupSummary {
                group: 0,
                n: budget,
                weighted_mean: mean,
            }],
            labels_spent: budget,
        },
        trace,
    ))
}

/// Largest-remainder rounding of `weight * budget` with every count floored
/// at one. Remainder ties break toward the lower index; the floor fix-up
/// takes from the largest counts.
pub fn proportional_allocation(weights: &[f64], budget: usize) -> Result<Vec<usize>> {
    let groups = weights.len();
    if budget < groups {
        return Err(Error::InfeasibleCoverage { budget, groups });
    }
    let quotas: Vec<f64> = weights.iter().map(|w| w * budget as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| *q as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..groups).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - counts[a] as f64;
        let rb = quotas[b] - counts[b] as f64;
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &g in order.iter().take(budget - assigned) {
        counts[g] += 1;
    }
    // Coverage floor: every stratum needs a sample for the aggregate to be
    // unbiased.
    while let Some(zero) = counts.iter().position(|&c| c == 0) {
        let donor = (0..groups)
            .max_by_key(|&g| counts[g])
            .expect("non-empty counts");
        counts[donor] -= 1;
        counts[zero] += 1;
    }
    debug_assert_eq!(counts.iter().sum::<usize>(), budget);
    Ok(counts)
}

/// Stratified random sampling with proportional allocation: `n_g` uniform
/// draws per stratum, aggregated through the weighted group means.
pub fn run_strs(
    oracle: &mut LabelOracle<'_>,
    scheme: &StratificationScheme,
    budget: usize,
    rng: &mut (impl Rng + ?Sized),
) -> Result<(MeanEstimate, SamplerTrace)> {
    let weights: Vec<f64> = scheme.weights().collect();
    let counts = proportional_allocation(&weights, budget)?;
    if oracle.remaining_budget() < budget {
        return Err(Error::BudgetExhausted);
    }
    let mut sampler = StratumSampler::new(oracle, scheme);
    let mut states: Vec<GroupState> = scheme
        .strata()
        .iter()
        .map(|s| GroupState::new(s.id, s.weight))
        .collect();
    let mut trace = SamplerTrace::new();
    let mut round = 0;
    for (g, &n_g) in counts.iter().enumerate() {
        for _ in 0..n_g {
            let (point, label) = sampler.draw(g, oracle, rng)?;
            states[g].push(label);
            trace.rows.push(TraceRow {
                round,
                group: g,
                point,
                label,
            });
            round += 1;
        }
    }
    let estimate = MeanEstimate::from_states(&states, 0)?;
    Ok((estimate, trace))
}

/// Thompson sampling configuration: the prior applies to every arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThompsonConfig {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for ThompsonConfig {
    fn default() -> Self {
        // Uninformative Beta(1,1).
        ThompsonConfig {
            alpha: 1.0,
            beta: 1.0,
        }
    }
}

impl ThompsonConfig {
    fn validate(&self) -> Result<()> {
        let alpha_ok = self.alpha > 0.0;
        if !alpha_ok {
            return Err(Error::Domain {
                parameter: "alpha",
                value: self.alpha,
            });
        }
        let beta_ok = self.beta > 0.0;
        if !beta_ok {
            return Err(Error::Domain {
                parameter: "beta",
                value: self.beta,
            });
        }
        Ok(())
    }

    fn prior_mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }
}

struct Posterior {
    alpha: f64,
    beta: f64,
    pulls: usize,
    reward_sum: f64,
}

impl Posterior {
    fn new(config: &ThompsonConfig) -> Self {
        Posterior {
            alpha: config.alpha,
            beta: config.beta,
            pulls: 0,
            reward_sum: 0.0,
        }
    }

    fn update(&mut self, reward: f64) {
        self.alpha += reward;
        self.beta += 1.0 - reward;
        self.pulls += 1;
        self.reward_sum += reward;
    }

    fn empirical_mean(&self, fallback: f64) -> f64 {
        if self.pulls == 0 {
            fallback
        } else {
            self.reward_sum / self.pulls as f64
        }
    }
}

/// Posterior draws for arm selection. A single live arm needs no draw: the
/// argmax is forced, so the label stream stays aligned with plain SRS.
fn select_arm(
    posteriors: &[Posterior],
    live: &[bool],
    rng: &mut (impl Rng + ?Sized),
) -> Option<(usize, Vec<f64>)> {
    let live_arms: Vec<usize> = (0..posteriors.len()).filter(|&g| live[g]).collect();
    match live_arms.len() {
        0 => None,
        1 => Some((live_arms[0], Vec::new())),
        _ => {
            let mut best: Option<(f64, usize)> = None;
            let mut draws = alloc::vec![f64::NAN; posteriors.len()];
            for &g in &live_arms {
                let p = &posteriors[g];
                let draw = Beta::new(p.alpha, p.beta)
                    .expect("posterior parameters are positive")
                    .sample(rng);
                draws[g] = draw;
                if best.is_none_or(|(b, _)| draw > b) {
                    best = Some((draw, g));
                }
            }
            best.map(|(_, g)| (g, draws))
        }
    }
}

/// Thompson sampling over `k` synthetic Bernoulli arms with equal weights.
///
/// Returns the weighted empirical-mean estimate and the per-arm pull
/// counts; the trace's `point` field carries the round index since there is
/// no pool.
pub fn run_thompson_arms(
    probs: &[f64],
    config: &ThompsonConfig,
    rounds: usize,
    rng: &mut (impl Rng + ?Sized),
) -> Result<(MeanEstimate, SamplerTrace, Vec<usize>)> {
    config.validate()?;
    if probs.is_empty() {
        return Err(Error::EmptyScheme);
    }
    for &p in probs {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain {
                parameter: "arm probability",
                value: p,
            });
        }
    }
    let k = probs.len();
    let mut posteriors: Vec<Posterior> = (0..k).map(|_| Posterior::new(config)).collect();
    let live = alloc::vec![true; k];
    let mut trace = SamplerTrace::new();
    for round in 0..rounds {
        let (g, draws) = select_arm(&posteriors, &live, rng).expect("arms never exhaust");
        let reward = if rng.random::<f64>() < probs[g] { 1.0 } else { 0.0 };
        posteriors[g].update(reward);
        trace.scores.push(draws);
        trace.rows.push(TraceRow {
            round,
            group: g,
            point: round,
            label: reward,
        });
    }
    let weight = 1.0 / k as f64;
    let per_group: Vec<GroupSummary> = posteriors
        .iter()
        .enumerate()
        .map(|(g, p)| GroupSummary {
            group: g,
            n: p.pulls,
            weighted_mean: weight * p.empirical_mean(config.prior_mean()),
        })
        .collect();
    let value = per_group.iter().map(|s| s.weighted_mean).sum();
    let pulls = posteriors.iter().map(|p| p.pulls).collect();
    Ok((
        MeanEstimate {
            value,
            per_group,
            labels_spent: rounds,
        },
        trace,
        pulls,
    ))
}

/// Thompson sampling over the strata of a pool-backed scheme (binary labels
/// only). Each round draws a success probability per live stratum from its
/// posterior, pulls the argmax stratum through the oracle, and updates its
/// posterior. The estimate weights each stratum's empirical mean by `P_g`;
/// strata never pulled contribute the prior mean.
pub fn run_thompson_binned(
    oracle: &mut LabelOracle<'_>,
    scheme: &StratificationScheme,
    config: &ThompsonConfig,
    budget: usize,
    rng: &mut (impl Rng + ?Sized),
) -> Result<(MeanEstimate, SamplerTrace)> {
    config.validate()?;
    if !oracle.pool().is_binary() {
        return Err(Error::NonBinaryLabels);
    }
    if oracle.remaining_budget() < budget {
        return Err(Error::BudgetExhausted);
    }
    let k = scheme.len();
    let mut sampler = StratumSampler::new(oracle, scheme);
    let mut posteriors: Vec<Posterior> = (0..k).map(|_| Posterior::new(config)).collect();
    let mut live: Vec<bool> = (0..k).map(|g| sampler.remaining(g) > 0).collect();
    let mut trace = SamplerTrace::new();
    for round in 0..budget {
        let Some((g, draws)) = select_arm(&posteriors, &live, rng) else {
            break;
        };
        let (point, label) = sampler.draw(g, oracle, rng)?;
        posteriors[g].update(label);
        if sampler.remaining(g) == 0 {
            live[g] = false;
        }
        trace.scores.push(draws);
        trace.rows.push(TraceRow {
            round,
            group: g,
            point,
            label,
        });
    }
    let per_group: Vec<GroupSummary> = scheme
        .strata()
        .iter()
        .zip(&posteriors)
        .map(|(s, p)| GroupSummary {
            group: s.id,
            n: p.pulls,
            weighted_mean: s.weight * p.empirical_mean(config.prior_mean()),
        })
        .collect();
    let value = per_group.iter().map(|s| s.weighted_mean).sum();
    let spent = trace.rows.len();
    Ok((
        MeanEstimate {
            value,
            per_group,
            labels_spent: spent,
        },
        trace,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::gen_threshold_pool;
    use crate::pool::LabeledPool;
    use crate::seeding;
    use crate::ucb::{run_warmstart_ucb, WsUcbParams};

    #[test]
    fn srs_on_all_zero_pool() {
        let pool = LabeledPool::with_alphabet(
            alloc::vec![0.1, 0.5, 0.9],
            alloc::vec![0.0, 0.0, 0.0],
            alloc::vec![0.0, 1.0],
            0,
        )
        .unwrap();
        let mut oracle = LabelOracle::new(&pool, 3);
        let mut rng = seeding::rng_from_seed(1);
        let (est, _) = run_srs(&mut oracle, 2, &mut rng).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn srs_census_recovers_pool_mean() {
        let (pool, _) = gen_threshold_pool(0.5, 0.05, 0.05, 300, 5).unwrap();
        let mut oracle = LabelOracle::new(&pool, 300);
        let mut rng = seeding::rng_from_seed(2);
        let (est, trace) = run_srs(&mut oracle, 300, &mut rng).unwrap();
        assert!((est.value - pool.census_mean()).abs() < 1e-12);
        assert_eq!(trace.len(), 300);
    }

    #[test]
    fn srs_rejects_undersized_pool() {
        let (pool, _) = gen_threshold_pool(0.5, 0.0, 0.0, 10, 5).unwrap();
        let mut oracle = LabelOracle::new(&pool, 50);
        let mut rng = seeding::rng_from_seed(2);
        assert_eq!(
            run_srs(&mut oracle, 11, &mut rng).unwrap_err(),
            Error::PoolTooSmall {
                pool: 10,
                budget: 11
            }
        );
    }

    #[test]
    fn srs_equals_single_stratum_ws_ucb() {
        let (pool, _) = gen_threshold_pool(0.5, 0.05, 0.05, 1_000, 5).unwrap();

        let mut oracle_a = LabelOracle::new(&pool, 40);
        let mut rng_a = seeding::rng_from_seed(33);
        let (est_a, trace_a) = run_srs(&mut oracle_a, 40, &mut rng_a).unwrap();

        let mut oracle_b = LabelOracle::new(&pool, 40);
        let mut rng_b = seeding::rng_from_seed(33);
        let single = StratificationScheme::single();
        let params = WsUcbParams::new(40, 1);
        let (est_b, trace_b) =
            run_warmstart_ucb(&mut oracle_b, &single, params, &mut rng_b).unwrap();

        assert_eq!(trace_a.rows, trace_b.rows);
        assert_eq!(est_a.value, est_b.value);
    }

    #[test]
    fn allocation_examples() {
        assert_eq!(proportional_allocation(&[0.5, 0.5], 10).unwrap(), [5, 5]);
        assert_eq!(
            proportional_allocation(&[0.5, 0.3, 0.2], 10).unwrap(),
            [5, 3, 2]
        );
        // Remainder tie (0.5, 0.5): the lower index gets the extra label.
        assert_eq!(proportional_allocation(&[0.7, 0.3], 5).unwrap(), [4, 1]);
    }

    #[test]
    fn allocation_floors_tiny_strata_at_one() {
        let counts = proportional_allocation(&[0.98, 0.01, 0.01], 10).unwrap();
        assert_eq!(counts.iter().sum::<usize>(), 10);
        assert!(counts.iter().all(|&c| c >= 1));
    }

    #[test]
    fn allocation_stays_within_one_of_quota() {
        let weights = [0.41, 0.23, 0.2, 0.16];
        for budget in [7usize, 20, 93] {
            let counts = proportional_allocation(&weights, budget).unwrap();
            assert_eq!(counts.iter().sum::<usize>(), budget);
            for (c, w) in counts.iter().zip(&weights) {
                assert!((*c as f64 - w * budget as f64).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn strs_rejects_budget_below_group_count() {
        assert_eq!(
            proportional_allocation(&[0.5, 0.3, 0.2], 2).unwrap_err(),
            Error::InfeasibleCoverage {
                budget: 2,
                groups: 3
            }
        );
    }

    #[test]
    fn strs_runs_and_aggregates() {
        let (pool, tm) = gen_threshold_pool(0.5, 0.0, 0.0, 2_000, 5).unwrap();
        let mut oracle = LabelOracle::new(&pool, 20);
        let scheme = StratificationScheme::split_at(0.5, 0.5).unwrap();
        let mut rng = seeding::rng_from_seed(3);
        let (est, trace) = run_strs(&mut oracle, &scheme, 20, &mut rng).unwrap();
        assert_eq!(trace.len(), 20);
        // Noiseless strata: the estimate is exactly the weight of the right
        // stratum.
        assert_eq!(est.value, 0.5);
        assert_eq!(tm.sigma1, 0.0);
    }

    #[test]
    fn single_arm_thompson_equals_srs() {
        let (pool, _) = gen_threshold_pool(0.5, 0.05, 0.05, 500, 5).unwrap();

        let mut oracle_a = LabelOracle::new(&pool, 30);
        let mut rng_a = seeding::rng_from_seed(12);
        let (est_a, trace_a) = run_srs(&mut oracle_a, 30, &mut rng_a).unwrap();

        let mut oracle_b = LabelOracle::new(&pool, 30);
        let mut rng_b = seeding::rng_from_seed(12);
        let single = StratificationScheme::single();
        let (est_b, trace_b) = run_thompson_binned(
            &mut oracle_b,
            &single,
            &ThompsonConfig::default(),
            30,
            &mut rng_b,
        )
        .unwrap();

        assert_eq!(trace_a.rows, trace_b.rows);
        assert_eq!(est_a.value, est_b.value);
    }

    #[test]
    fn thompson_concentrates_on_best_arm() {
        let mut rng = seeding::rng_from_seed(40);
        let (_, _, pulls) = run_thompson_arms(
            &[0.1, 0.5, 0.8],
            &ThompsonConfig::default(),
            3_000,
            &mut rng,
        )
        .unwrap();
        assert!(pulls[2] > 1_500, "pulls {pulls:?}");
    }

    #[test]
    fn thompson_rejects_non_binary_pool() {
        let pool = LabeledPool::with_alphabet(
            alloc::vec![0.1, 0.5, 0.9],
            alloc::vec![0.0, 1.0, 2.0],
            alloc::vec![0.0, 1.0, 2.0],
            0,
        )
        .unwrap();
        let mut oracle = LabelOracle::new(&pool, 3);
        let single = StratificationScheme::single();
        let mut rng = seeding::rng_from_seed(1);
        assert_eq!(
            run_thompson_binned(
                &mut oracle,
                &single,
                &ThompsonConfig::default(),
                2,
                &mut rng
            )
            .unwrap_err(),
            Error::NonBinaryLabels
        );
    }

    #[test]
    fn thompson_unpulled_bins_use_prior_mean() {
        // One point per bin and a budget of one: the other bin contributes
        // the prior mean 0.5.
        let pool = LabeledPool::with_alphabet(
            alloc::vec![0.25, 0.75],
            alloc::vec![0.0, 1.0],
            alloc::vec![0.0, 1.0],
            0,
        )
        .unwrap();
        let mut oracle = LabelOracle::new(&pool, 1);
        let scheme = StratificationScheme::split_at(0.5, 0.5).unwrap();
        let mut rng = seeding::rng_from_seed(6);
        let (est, trace) = run_thompson_binned(
            &mut oracle,
            &scheme,
            &ThompsonConfig::default(),
            1,
            &mut rng,
        )
        .unwrap();
        assert_eq!(trace.len(), 1);
        let _pulled = trace.rows[0].group;
        let observed = trace.rows[0].label;
        let expect = 0.5 * observed + 0.5 * 0.5;
        assert!((est.value - expect).abs() < 1e-12);
    }
}
