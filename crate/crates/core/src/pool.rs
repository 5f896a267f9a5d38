//! Finite labeled pools and the budget-metered label oracle.
//!
//! A pool holds covariates in the open and labels behind the oracle: every
//! reveal of a fresh point costs one unit of budget, re-reveals are
//! memoized and free, and a revealed label never changes.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::scheme::{StratificationScheme, Stratum};

/// Maximum number of distinct label values a pool may declare.
pub const MAX_ALPHABET: usize = 16;

/// Finite collection of `(x, y)` points with labels hidden behind
/// [`LabelOracle`].
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPool {
    xs: Vec<f64>,
    ys: Vec<f64>,
    alphabet: Vec<f64>,
    id: u64,
}

impl LabeledPool {
    /// Builds a pool, inferring the label alphabet from the data.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, id: u64) -> Result<Self> {
        let mut alphabet: Vec<f64> = Vec::new();
        for &y in &ys {
            if !alphabet.contains(&y) {
                alphabet.push(y);
            }
        }
        alphabet.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Self::with_alphabet(xs, ys, alphabet, id)
    }

    /// Builds a pool with a declared alphabet; every label must be a member.
    pub fn with_alphabet(xs: Vec<f64>, ys: Vec<f64>, alphabet: Vec<f64>, id: u64) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::EmptyPool);
        }
        if alphabet.is_empty() || alphabet.len() > MAX_ALPHABET {
            return Err(Error::Domain {
                parameter: "alphabet size",
                value: alphabet.len() as f64,
            });
        }
        for &x in &xs {
            if !x.is_finite() {
                return Err(Error::Domain {
                    parameter: "covariate",
                    value: x,
                });
            }
        }
        for &y in &ys {
            if !alphabet.contains(&y) {
                return Err(Error::LabelOutsideAlphabet { value: y });
            }
        }
        Ok(LabeledPool { xs, ys, alphabet, id })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Unlabeled covariates are freely observable.
    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn x(&self, i: usize) -> f64 {
        self.xs[i]
    }

    pub fn alphabet(&self) -> &[f64] {
        &self.alphabet
    }

    /// `k` for a `{0, ..., k}`-style alphabet.
    pub fn classes_minus_one(&self) -> usize {
        self.alphabet.len().saturating_sub(1).max(1)
    }

    pub fn is_binary(&self) -> bool {
        self.alphabet.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Identity assigned at construction, independent of RNG state.
    pub fn id(&self) -> u64 {
        self.id
    }

    /// Covariate range `(min, max)`.
    pub fn support(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &x in &self.xs {
            lo = lo.min(x);
            hi = hi.max(x);
        }
        (lo, hi)
    }

    /// Mean of all hidden labels. Evaluation-only: the error reference for
    /// file-loaded pools, never an input to a sampler.
    pub fn census_mean(&self) -> f64 {
        self.ys.iter().sum::<f64>() / self.ys.len() as f64
    }

    pub(crate) fn label(&self, i: usize) -> f64 {
        self.ys[i]
    }
}

/// Budget-metered gate in front of a pool's labels.
#[derive(Debug)]
pub struct LabelOracle<'a> {
    pool: &'a LabeledPool,
    budget: usize,
    spent: usize,
    revealed: Vec<bool>,
}

impl<'a> LabelOracle<'a> {
    pub fn new(pool: &'a LabeledPool, budget: usize) -> Self {
        LabelOracle {
            pool,
            budget,
            spent: 0,
            revealed: alloc::vec![false; pool.len()],
        }
    }

    pub fn pool(&self) -> &'a LabeledPool {
        self.pool
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn spent(&self) -> usize {
        self.spent
    }

    pub fn remaining_budget(&self) -> usize {
        self.budget - self.spent
    }

    pub fn is_revealed(&self, i: usize) -> bool {
        self.revealed[i]
    }

    /// Reveals the label of point `i`. A fresh reveal costs one unit of
    /// budget; a repeated reveal is free.
    pub fn reveal(&mut self, i: usize) -> Result<f64> {
        if !self.revealed[i] {
            if self.spent >= self.budget {
                return Err(Error::BudgetExhausted);
            }
            self.revealed[i] = true;
            self.spent += 1;
        }
        Ok(self.pool.label(i))
    }
}

/// Reveals a uniformly random unrevealed point of `stratum`.
///
/// One-shot form used by learners whose query region changes every epoch;
/// samplers with a fixed scheme use [`StratumSampler`] instead.
pub fn sample_from_stratum(
    oracle: &mut LabelOracle<'_>,
    stratum: &Stratum,
    rng: &mut (impl Rng + ?Sized),
) -> Result<(usize, f64, f64)> {
    if oracle.remaining_budget() == 0 {
        return Err(Error::BudgetExhausted);
    }
    let candidates: Vec<usize> = (0..oracle.pool().len())
        .filter(|&i| !oracle.is_revealed(i) && stratum.contains(oracle.pool().x(i)))
        .collect();
    if candidates.is_empty() {
        return Err(Error::StratumExhausted {
            stratum: stratum.id,
        });
    }
    let i = candidates[rng.random_range(0..candidates.len())];
    let y = oracle.reveal(i)?;
    Ok((i, oracle.pool().x(i), y))
}

/// Per-stratum index of unrevealed points, kept in O(1)-draw form.
///
/// Built once per run from the oracle's current reveal state; the strata of
/// a scheme are disjoint, so only this sampler's own draws can invalidate
/// the index during the run.
#[derive(Debug)]
pub struct StratumSampler {
    candidates: Vec<Vec<usize>>,
}

impl StratumSampler {
    pub fn new(oracle: &LabelOracle<'_>, scheme: &StratificationScheme) -> Self {
        let mut candidates: Vec<Vec<usize>> = alloc::vec![Vec::new(); scheme.len()];
        for i in 0..oracle.pool().len() {
            if oracle.is_revealed(i) {
                continue;
            }
            if let Some(g) = scheme.assign(oracle.pool().x(i)) {
                candidates[g].push(i);
            }
        }
        StratumSampler { candidates }
    }

    pub fn remaining(&self, g: usize) -> usize {
        self.candidates[g].len()
    }

    pub fn any_remaining(&self) -> bool {
        self.candidates.iter().any(|c| !c.is_empty())
    }

    /// Draws uniformly without replacement from stratum `g` and reveals the
    /// point's label.
    pub fn draw(
        &mut self,
        g: usize,
        oracle: &mut LabelOracle<'_>,
        rng: &mut (impl Rng + ?Sized),
    ) -> Result<(usize, f64)> {
        if oracle.remaining_budget() == 0 {
            return Err(Error::BudgetExhausted);
        }
        let bucket = &mut self.candidates[g];
        if bucket.is_empty() {
            return Err(Error::StratumExhausted { stratum: g });
        }
        let j = rng.random_range(0..bucket.len());
        let i = bucket.swap_remove(j);
        let y = oracle.reveal(i)?;
        Ok((i, y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::Interval;
    use crate::seeding;

    fn tiny_pool() -> LabeledPool {
        LabeledPool::with_alphabet(
            alloc::vec![0.1, 0.4, 0.6, 0.9],
            alloc::vec![0.0, 0.0, 1.0, 1.0],
            alloc::vec![0.0, 1.0],
            7,
        )
        .unwrap()
    }

    #[test]
    fn budget_metering_and_memoization() {
        let pool = tiny_pool();
        let mut oracle = LabelOracle::new(&pool, 2);
        assert_eq!(oracle.reveal(0).unwrap(), 0.0);
        assert_eq!(oracle.spent(), 1);
        // Re-reveal is free.
        assert_eq!(oracle.reveal(0).unwrap(), 0.0);
        assert_eq!(oracle.spent(), 1);
        assert_eq!(oracle.reveal(2).unwrap(), 1.0);
        assert_eq!(oracle.spent(), 2);
        assert_eq!(oracle.reveal(3), Err(Error::BudgetExhausted));
        // Memoized reveals still work after exhaustion.
        assert_eq!(oracle.reveal(2).unwrap(), 1.0);
    }

    #[test]
    fn sample_from_stratum_exhaustion_path() {
        let pool = tiny_pool();
        let mut oracle = LabelOracle::new(&pool, 4);
        let mut rng = seeding::rng_from_seed(3);
        let stratum = Stratum {
            id: 0,
            intervals: alloc::vec![Interval::new(0.0, 0.5)],
            weight: 0.5,
        };
        let (a, _, _) = sample_from_stratum(&mut oracle, &stratum, &mut rng).unwrap();
        let (b, _, _) = sample_from_stratum(&mut oracle, &stratum, &mut rng).unwrap();
        assert_ne!(a, b);
        assert!(a < 2 && b < 2);
        assert_eq!(
            sample_from_stratum(&mut oracle, &stratum, &mut rng),
            Err(Error::StratumExhausted { stratum: 0 })
        );
    }

    #[test]
    fn sample_from_stratum_forced_choice() {
        let pool = tiny_pool();
        let mut oracle = LabelOracle::new(&pool, 4);
        let mut rng = seeding::rng_from_seed(11);
        let stratum = Stratum {
            id: 3,
            intervals: alloc::vec![Interval::new(0.85, 1.0)],
            weight: 0.25,
        };
        let (i, x, y) = sample_from_stratum(&mut oracle, &stratum, &mut rng).unwrap();
        assert_eq!((i, x, y), (3, 0.9, 1.0));
    }

    #[test]
    fn stratum_sampler_skips_already_revealed() {
        let pool = tiny_pool();
        let mut oracle = LabelOracle::new(&pool, 4);
        oracle.reveal(1).unwrap();
        let scheme = StratificationScheme::split_at(0.5, 0.5).unwrap();
        let sampler = StratumSampler::new(&oracle, &scheme);
        assert_eq!(sampler.remaining(0), 1);
        assert_eq!(sampler.remaining(1), 2);
    }

    #[test]
    fn pool_rejects_labels_outside_alphabet() {
        let err = LabeledPool::with_alphabet(
            alloc::vec![0.5],
            alloc::vec![2.0],
            alloc::vec![0.0, 1.0],
            0,
        )
        .unwrap_err();
        assert_eq!(err, Error::LabelOutsideAlphabet { value: 2.0 });
    }
}
