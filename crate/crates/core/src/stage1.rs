//! Stage-1 learners: subroutines that spend part of the label budget to
//! learn a classifier whose preimages become the stage-2 stratification.
//!
//! Ships a disagreement-based threshold learner (epoch-doubling batches,
//! Hoeffding elimination over a shrinking version-space interval), a
//! heterogeneity-aware wrapper that turns the final disagreement region
//! into extra strata via a small output offset, and a registry exposing
//! both behind one plug-in signature.

use alloc::boxed::Box;
use alloc::string::ToString;
use alloc::vec::Vec;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::math;
use crate::pool::{LabelOracle, LabeledPool};
use crate::scheme::{Interval, Provenance, StratificationScheme};
use crate::trace::{SamplerTrace, TraceRow};

/// Numeric floor for the heterogeneity offset: `exp(-N/log N)` underflows
/// quickly, and the offset only needs to create distinct stratum
/// identities.
pub const EPS_FLOOR: f64 = 1e-6;

/// A learned labeling rule over the 1-D covariate.
#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    /// Same output everywhere; induces a single stratum.
    Constant { value: f64 },
    /// `1{x >= t}`.
    Threshold { t: f64 },
    /// `1{x >= t}` plus an `eps` offset inside the abstention region, so the
    /// image has up to four distinct values.
    ThresholdWithAbstention { t: f64, region: Interval, eps: f64 },
}

impl Classifier {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Classifier::Constant { value } => value,
            Classifier::Threshold { t } => {
                if x >= t {
                    1.0
                } else {
                    0.0
                }
            }
            Classifier::ThresholdWithAbstention { t, region, eps } => {
                let base = if x >= t { 1.0 } else { 0.0 };
                if region.contains(x) {
                    base + eps
                } else {
                    base
                }
            }
        }
    }

    /// Preimages as `(image value, membership)` pairs in left-to-right
    /// covariate order. May contain empty memberships; partition building
    /// drops them.
    pub fn preimages(&self) -> Vec<(f64, Vec<Interval>)> {
        match *self {
            Classifier::Constant { value } => {
                alloc::vec![(value, alloc::vec![Interval::all()])]
            }
            Classifier::Threshold { t } => alloc::vec![
                (0.0, alloc::vec![Interval::new(f64::NEG_INFINITY, t)]),
                (1.0, alloc::vec![Interval::new(t, f64::INFINITY)]),
            ],
            Classifier::ThresholdWithAbstention { t, region, eps } => alloc::vec![
                (0.0, alloc::vec![Interval::new(f64::NEG_INFINITY, region.lo)]),
                (eps, alloc::vec![Interval::new(region.lo, t)]),
                (1.0 + eps, alloc::vec![Interval::new(t, region.hi)]),
                (1.0, alloc::vec![Interval::new(region.hi, f64::INFINITY)]),
            ],
        }
    }
}

/// Output of a stage-1 subroutine.
#[derive(Debug, Clone, PartialEq)]
pub struct SubroutineResult {
    pub classifier: Classifier,
    /// Final version-space interval: where surviving hypotheses still
    /// disagree. `None` when the subroutine has no such notion.
    pub disagreement_region: Option<Interval>,
    pub labels_spent: usize,
    pub epochs: usize,
    pub eliminations: usize,
    pub trace: SamplerTrace,
}

/// Disagreement-based threshold learner.
///
/// Maintains a version-space interval of candidate thresholds. Epochs
/// double the batch size starting at `max(4, budget/8)`; each epoch queries
/// a fresh uniform batch from the current disagreement region, scores every
/// candidate threshold position by its empirical error on the batch, and
/// keeps the positions within twice the Hoeffding width
/// `sqrt(ln(2 e^2 / delta) / (2 n))` of the best. The interval shrinks to
/// the hull of survivors. Stops at budget exhaustion, when the interval is
/// narrower than `1/M`, or when the region has no fresh points left.
pub fn learn_threshold_a2(
    oracle: &mut LabelOracle<'_>,
    budget: usize,
    delta: f64,
    rng: &mut (impl Rng + ?Sized),
) -> Result<SubroutineResult> {
    // Leave one average gap above the top point so the all-labels-zero
    // hypothesis (threshold above every point) stays representable.
    let pool = oracle.pool();
    let (min_x, max_x) = pool.support();
    let gap = (max_x - min_x).max(f64::MIN_POSITIVE) / pool.len() as f64;
    let domain = Interval::new(min_x, max_x + gap);
    learn_threshold_a2_in(oracle, domain, budget, delta, rng)
}

/// [`learn_threshold_a2`] with an explicit threshold domain, for pools whose
/// declared covariate space is wider than the observed point range.
pub fn learn_threshold_a2_in(
    oracle: &mut LabelOracle<'_>,
    domain: Interval,
    budget: usize,
    delta: f64,
    rng: &mut (impl Rng + ?Sized),
) -> Result<SubroutineResult> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain {
            parameter: "delta",
            value: delta,
        });
    }
    if budget == 0 {
        // Nothing to learn from: fall back to the whole-space stratum.
        return Ok(SubroutineResult {
            classifier: Classifier::Constant { value: 0.0 },
            disagreement_region: None,
            labels_spent: 0,
            epochs: 0,
            eliminations: 0,
            trace: SamplerTrace::new(),
        });
    }

    let pool = oracle.pool();
    let m = pool.len();
    let mut lo = domain.lo;
    let mut hi = domain.hi;
    let width_stop = 1.0 / m as f64;

    let mut spent = 0usize;
    let mut epochs = 0usize;
    let mut eliminations = 0usize;
    let mut trace = SamplerTrace::new();
    let first_batch = (budget / 8).max(4);

    while spent < budget && (hi - lo) >= width_stop {
        let doubling = 2usize.saturating_pow(epochs.min(60) as u32);
        let batch_target = first_batch.saturating_mul(doubling).min(budget - spent);
        epochs += 1;

        let mut candidates: Vec<usize> = (0..m)
            .filter(|&i| {
                let x = pool.x(i);
                !oracle.is_revealed(i) && lo <= x && x < hi
            })
            .collect();
        if candidates.is_empty() {
            break;
        }

        let take = batch_target.min(candidates.len());
        let mut batch: Vec<(f64, f64)> = Vec::with_capacity(take);
        for _ in 0..take {
            let j = rng.random_range(0..candidates.len());
            let i = candidates.swap_remove(j);
            let y = oracle.reveal(i)?;
            trace.rows.push(TraceRow {
                round: spent,
                group: 0,
                point: i,
                label: y,
            });
            batch.push((pool.x(i), y));
            spent += 1;
        }
        batch.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

        // err(p): classify the first p points 0 and the rest 1.
        let n = batch.len();
        let total_ones: f64 = batch.iter().map(|&(_, y)| y).sum();
        let mut best = f64::INFINITY;
        let mut errs = Vec::with_capacity(n + 1);
        let mut prefix_ones = 0.0;
        for p in 0..=n {
            let suffix_zeros = (n - p) as f64 - (total_ones - prefix_ones);
            let err = (prefix_ones + suffix_zeros) / n as f64;
            errs.push(err);
            best = best.min(err);
            if let Some(&(_, y)) = batch.get(p) {
                prefix_ones += y;
            }
        }

        let width = math::sqrt(math::ln(2.0 * (epochs * epochs) as f64 / delta) / (2.0 * n as f64));
        let cut = best + 2.0 * width;
        let mut pmin = n;
        let mut pmax = 0;
        for (p, &err) in errs.iter().enumerate() {
            if err <= cut {
                pmin = pmin.min(p);
                pmax = pmax.max(p);
            }
        }
        eliminations += n + 1 - (pmax - pmin + 1);

        let new_lo = if pmin == 0 { lo } else { batch[pmin - 1].0 };
        let new_hi = if pmax == n { hi } else { batch[pmax].0 };
        lo = lo.max(new_lo);
        hi = hi.min(new_hi);
    }

    let t = 0.5 * (lo + hi);
    Ok(SubroutineResult {
        classifier: Classifier::Threshold { t },
        disagreement_region: Some(Interval::new(lo, hi)),
        labels_spent: spent,
        epochs,
        eliminations,
        trace,
    })
}

/// Heterogeneity-aware wrapper: offsets the classifier by
/// `eps(N) = max(exp(-N / ln N), 1e-6)` inside the disagreement region,
/// splitting the space into up to four strata that isolate the ambiguous
/// middle. Outside the region the wrapped classifier agrees with the
/// original exactly.
pub fn heterogeneity_wrap(result: &SubroutineResult, budget: usize) -> Classifier {
    let region = match result.disagreement_region {
        Some(r) if !r.is_empty() => r,
        _ => return result.classifier.clone(),
    };
    let t = match result.classifier {
        Classifier::Threshold { t } => t,
        _ => return result.classifier.clone(),
    };
    let eps = if budget >= 2 {
        math::exp(-(budget as f64) / math::ln(budget as f64)).max(EPS_FLOOR)
    } else {
        EPS_FLOOR
    };
    Classifier::ThresholdWithAbstention { t, region, eps }
}

/// Stratification induced by a classifier: one stratum per image value
/// holding at least one pool point, weighted by its empirical pool
/// fraction.
pub fn induced_partition(
    classifier: &Classifier,
    pool: &LabeledPool,
) -> Result<StratificationScheme> {
    let preimages = classifier.preimages();
    let mut counts = alloc::vec![0usize; preimages.len()];
    for &x in pool.xs() {
        let part = preimages
            .iter()
            .position(|(_, ivs)| ivs.iter().any(|iv| iv.contains(x)))
            .ok_or(Error::UncoveredPoint { x })?;
        counts[part] += 1;
    }
    let m = pool.len() as f64;
    let parts = preimages
        .into_iter()
        .zip(&counts)
        .map(|((_, ivs), &c)| (ivs, c as f64 / m))
        .collect();
    StratificationScheme::new(parts, Provenance::LearnedFromClassifier)
}

/// Uniform plug-in signature every stage-1 subroutine satisfies.
pub trait Subroutine {
    fn name(&self) -> &'static str;
    fn run(
        &self,
        oracle: &mut LabelOracle<'_>,
        budget: usize,
        delta: f64,
        rng: &mut dyn RngCore,
    ) -> Result<SubroutineResult>;
}

struct A2Threshold;

impl Subroutine for A2Threshold {
    fn name(&self) -> &'static str {
        "a2-threshold"
    }

    fn run(
        &self,
        oracle: &mut LabelOracle<'_>,
        budget: usize,
        delta: f64,
        rng: &mut dyn RngCore,
    ) -> Result<SubroutineResult> {
        learn_threshold_a2(oracle, budget, delta, rng)
    }
}

struct A2ThresholdHet;

impl Subroutine for A2ThresholdHet {
    fn name(&self) -> &'static str {
        "a2-threshold-het"
    }

    fn run(
        &self,
        oracle: &mut LabelOracle<'_>,
        budget: usize,
        delta: f64,
        rng: &mut dyn RngCore,
    ) -> Result<SubroutineResult> {
        let mut result = learn_threshold_a2(oracle, budget, delta, rng)?;
        result.classifier = heterogeneity_wrap(&result, budget);
        Ok(result)
    }
}

/// Spends nothing and returns the constant classifier; the induced scheme
/// is the single whole-space stratum.
struct ConstantSubroutine;

impl Subroutine for ConstantSubroutine {
    fn name(&self) -> &'static str {
        "constant"
    }

    fn run(
        &self,
        _oracle: &mut LabelOracle<'_>,
        _budget: usize,
        _delta: f64,
        _rng: &mut dyn RngCore,
    ) -> Result<SubroutineResult> {
        Ok(SubroutineResult {
            classifier: Classifier::Constant { value: 0.0 },
            disagreement_region: None,
            labels_spent: 0,
            epochs: 0,
            eliminations: 0,
            trace: SamplerTrace::new(),
        })
    }
}

/// Registered subroutine names, in lookup order.
pub const SUBROUTINE_NAMES: [&str; 4] = [
    "a2-threshold",
    "a2-threshold-het",
    "constant",
    "agarwal-multiclass",
];

/// Looks up a registered stage-1 subroutine by name.
pub fn plugin_subroutine(name: &str) -> Result<Box<dyn Subroutine>> {
    match name {
        "a2-threshold" => Ok(Box::new(A2Threshold)),
        "a2-threshold-het" => Ok(Box::new(A2ThresholdHet)),
        "constant" => Ok(Box::new(ConstantSubroutine)),
        // Multiclass slot: interface reserved, learner not implemented.
        "agarwal-multiclass" => Err(Error::NotImplemented {
            name: "agarwal-multiclass",
        }),
        _ => Err(Error::UnknownSubroutine {
            name: name.to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::gen_threshold_pool;
    use crate::seeding;

    #[test]
    fn noiseless_interval_contains_truth_and_shrinks() {
        let mut widths = [0.0f64; 2];
        for (slot, budget) in [(0usize, 100usize), (1, 200)] {
            let mut total = 0.0;
            for seed in 0..40 {
                let (pool, _) = gen_threshold_pool(0.5, 0.0, 0.0, 10_000, 100 + seed).unwrap();
                let mut oracle = LabelOracle::new(&pool, budget);
                let mut rng = seeding::stream(7, &[seed, budget as u64]);
                let res = learn_threshold_a2(&mut oracle, budget, 0.1, &mut rng).unwrap();
                let region = res.disagreement_region.unwrap();
                assert!(region.lo <= 0.5 && 0.5 <= region.hi);
                let t = match res.classifier {
                    Classifier::Threshold { t } => t,
                    _ => panic!("expected threshold"),
                };
                assert!((t - 0.5).abs() <= region.width() / 2.0 + 1e-12);
                total += region.width();
            }
            widths[slot] = total / 40.0;
        }
        assert!(
            widths[1] <= widths[0] / 1.5,
            "width({}) vs width({}) do not shrink enough",
            widths[0],
            widths[1]
        );
    }

    #[test]
    fn all_zero_pool_predicts_zero_everywhere() {
        // One-class pool over the [0, 1] threshold domain: the version
        // space collapses toward the 1-side, so the midpoint threshold
        // clears every pool point.
        let xs: Vec<f64> = (0..50).map(|i| i as f64 / 100.0).collect();
        let ys = alloc::vec![0.0; 50];
        let pool =
            LabeledPool::with_alphabet(xs, ys, alloc::vec![0.0, 1.0], 0).unwrap();
        let mut oracle = LabelOracle::new(&pool, 50);
        let mut rng = seeding::rng_from_seed(5);
        let res =
            learn_threshold_a2_in(&mut oracle, Interval::new(0.0, 1.0), 50, 0.1, &mut rng)
                .unwrap();
        let region = res.disagreement_region.unwrap();
        assert!(region.lo > 0.0, "version space should collapse rightward");
        for &x in pool.xs() {
            assert_eq!(res.classifier.eval(x), 0.0);
        }
    }

    #[test]
    fn budget_zero_falls_back_to_single_stratum() {
        let (pool, _) = gen_threshold_pool(0.5, 0.0, 0.0, 100, 1).unwrap();
        let mut oracle = LabelOracle::new(&pool, 10);
        let mut rng = seeding::rng_from_seed(1);
        let res = learn_threshold_a2(&mut oracle, 0, 0.1, &mut rng).unwrap();
        assert_eq!(res.labels_spent, 0);
        let scheme = induced_partition(&res.classifier, &pool).unwrap();
        assert_eq!(scheme.len(), 1);
    }

    #[test]
    fn noisy_interval_still_contains_truth_mostly() {
        let mut hits = 0;
        let runs = 60;
        for seed in 0..runs {
            let (pool, _) = gen_threshold_pool(0.5, 0.05, 0.05, 10_000, 300 + seed).unwrap();
            let mut oracle = LabelOracle::new(&pool, 100);
            let mut rng = seeding::stream(11, &[seed]);
            let res = learn_threshold_a2(&mut oracle, 100, 0.1, &mut rng).unwrap();
            let region = res.disagreement_region.unwrap();
            if region.lo <= 0.5 && 0.5 <= region.hi {
                hits += 1;
            }
        }
        assert!(hits as f64 / runs as f64 >= 0.9, "coverage {hits}/{runs}");
    }

    #[test]
    fn wrapper_preimages_match_case_split() {
        let res = SubroutineResult {
            classifier: Classifier::Threshold { t: 0.5 },
            disagreement_region: Some(Interval::new(0.4, 0.6)),
            labels_spent: 0,
            epochs: 0,
            eliminations: 0,
            trace: SamplerTrace::new(),
        };
        let wrapped = heterogeneity_wrap(&res, 100);
        // eps = exp(-100/ln 100) ~ 3.7e-10, floored to 1e-6.
        match wrapped {
            Classifier::ThresholdWithAbstention { t, region, eps } => {
                assert_eq!(t, 0.5);
                assert_eq!(region, Interval::new(0.4, 0.6));
                assert_eq!(eps, EPS_FLOOR);
            }
            _ => panic!("expected abstention classifier"),
        }
        assert_eq!(wrapped.eval(0.2), 0.0);
        assert_eq!(wrapped.eval(0.45), EPS_FLOOR);
        assert_eq!(wrapped.eval(0.55), 1.0 + EPS_FLOOR);
        assert_eq!(wrapped.eval(0.8), 1.0);
    }

    #[test]
    fn wrapper_without_region_is_identity() {
        let res = SubroutineResult {
            classifier: Classifier::Threshold { t: 0.3 },
            disagreement_region: Some(Interval::new(0.3, 0.3)),
            labels_spent: 0,
            epochs: 0,
            eliminations: 0,
            trace: SamplerTrace::new(),
        };
        assert_eq!(heterogeneity_wrap(&res, 50), Classifier::Threshold { t: 0.3 });
    }

    #[test]
    fn induced_partition_examples() {
        let (pool, _) = gen_threshold_pool(0.5, 0.0, 0.0, 10_000, 23).unwrap();

        let constant = induced_partition(&Classifier::Constant { value: 0.0 }, &pool).unwrap();
        assert_eq!(constant.len(), 1);
        assert_eq!(constant.strata()[0].weight, 1.0);

        let split = induced_partition(&Classifier::Threshold { t: 0.5 }, &pool).unwrap();
        assert_eq!(split.len(), 2);
        for s in split.strata() {
            assert!((s.weight - 0.5).abs() < 0.015);
        }

        let four = induced_partition(
            &Classifier::ThresholdWithAbstention {
                t: 0.5,
                region: Interval::new(0.4, 0.6),
                eps: EPS_FLOOR,
            },
            &pool,
        )
        .unwrap();
        assert!(four.len() <= 4);
        let wsum: f64 = four.weights().sum();
        assert!((wsum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn registry_lookups() {
        assert_eq!(plugin_subroutine("a2-threshold").unwrap().name(), "a2-threshold");
        assert_eq!(
            plugin_subroutine("a2-threshold-het").unwrap().name(),
            "a2-threshold-het"
        );
        assert!(matches!(
            plugin_subroutine("agarwal-multiclass"),
            Err(Error::NotImplemented { .. })
        ));
        match plugin_subroutine("nope") {
            Err(Error::UnknownSubroutine { name }) => assert_eq!(name, "nope"),
            _ => panic!("expected unknown-subroutine error"),
        }
    }

    #[test]
    fn version_space_never_grows() {
        let (pool, _) = gen_threshold_pool(0.5, 0.1, 0.1, 5_000, 77).unwrap();
        // Re-run with increasing budgets; each budget's interval must sit
        // inside the untouched support, and monotonicity within a run is
        // enforced by construction (lo only rises, hi only falls). Spot
        // check via the final interval being inside [0, 1 + gap].
        for budget in [20, 80, 320] {
            let mut oracle = LabelOracle::new(&pool, budget);
            let mut rng = seeding::stream(3, &[budget as u64]);
            let res = learn_threshold_a2(&mut oracle, budget, 0.1, &mut rng).unwrap();
            let region = res.disagreement_region.unwrap();
            assert!(region.lo >= 0.0 && region.hi <= 1.0 + 1.0 / 5_000.0 + 1e-9);
            assert!(region.lo <= region.hi);
        }
    }
}
