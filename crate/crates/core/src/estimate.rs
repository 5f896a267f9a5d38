//! Elementary estimators shared by every sampler: weighted group means,
//! their aggregation, and the average within-group variance.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::scheme::StratificationScheme;

/// Weighted sample mean of one stratum: `P_g` times the plain mean of the
/// observed labels.
pub fn weighted_group_mean(labels: &[f64], weight: f64) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::UndefinedEstimate("weighted group mean of zero labels"));
    }
    if !(weight > 0.0 && weight <= 1.0) {
        return Err(Error::Domain {
            parameter: "P_g",
            value: weight,
        });
    }
    let mut sum = 0.0;
    for &y in labels {
        sum += weight * y;
    }
    Ok(sum / labels.len() as f64)
}

/// Contribution of one stratum to a [`MeanEstimate`].
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub group: usize,
    pub n: usize,
    pub weighted_mean: f64,
}

/// Sums the per-group weighted means. Every stratum needs at least one
/// sample; otherwise the aggregate would be biased.
pub fn aggregate_mean(per_group: &[GroupSummary]) -> Result<f64> {
    for s in per_group {
        if s.n == 0 {
            return Err(Error::IncompleteCoverage { stratum: s.group });
        }
    }
    Ok(per_group.iter().map(|s| s.weighted_mean).sum())
}

/// Average within-group variance `Σ_g σ'_g² P_g` of a scheme.
pub fn sigma1(scheme: &StratificationScheme, cond_vars: &[f64]) -> Result<f64> {
    if cond_vars.len() != scheme.len() {
        return Err(Error::Domain {
            parameter: "cond_vars length",
            value: cond_vars.len() as f64,
        });
    }
    let mut total = 0.0;
    for (s, &v) in scheme.strata().iter().zip(cond_vars) {
        if v < 0.0 || !v.is_finite() {
            return Err(Error::Domain {
                parameter: "conditional variance",
                value: v,
            });
        }
        total += v * s.weight;
    }
    Ok(total)
}

/// Running statistics of one stratum during a sampling run.
///
/// Accumulates the weighted observations `P_g · Y` in sum and
/// sum-of-squares form; the mean is defined from one sample, the standard
/// deviation (with the `n - 1` denominator) from two.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupState {
    group: usize,
    weight: f64,
    n: usize,
    sum: f64,
    sum_sq: f64,
}

impl GroupState {
    pub fn new(group: usize, weight: f64) -> Self {
        GroupState {
            group,
            weight,
            n: 0,
            sum: 0.0,
            sum_sq: 0.0,
        }
    }

    pub fn push(&mut self, label: f64) {
        let wy = self.weight * label;
        self.n += 1;
        self.sum += wy;
        self.sum_sq += wy * wy;
    }

    pub fn group(&self) -> usize {
        self.group
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `μ̂_g`, defined once the stratum has a sample.
    pub fn weighted_mean(&self) -> Option<f64> {
        (self.n >= 1).then(|| self.sum / self.n as f64)
    }

    /// `σ̂_g`, defined once the stratum has two samples. The sum-of-squares
    /// recomputation can go negative by a rounding hair; clamp to zero.
    pub fn weighted_std(&self) -> Option<f64> {
        if self.n < 2 {
            return None;
        }
        let n = self.n as f64;
        let mean = self.sum / n;
        let ss = (self.sum_sq - n * mean * mean).max(0.0);
        Some(math::sqrt(ss / (n - 1.0)))
    }

    pub fn summary(&self) -> GroupSummary {
        GroupSummary {
            group: self.group,
            n: self.n,
            weighted_mean: self.weighted_mean().unwrap_or(0.0),
        }
    }
}

/// A completed mean estimate: the aggregate value, its per-group parts, and
/// the number of labels the run consumed.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanEstimate {
    pub value: f64,
    pub per_group: Vec<GroupSummary>,
    pub labels_spent: usize,
}

impl MeanEstimate {
    /// Builds the estimate by aggregating group states; fails if any
    /// stratum is unsampled.
    pub fn from_states(states: &[GroupState], extra_labels: usize) -> Result<Self> {
        let per_group: Vec<GroupSummary> = states.iter().map(GroupState::summary).collect();
        let value = aggregate_mean(&per_group)?;
        let spent: usize = per_group.iter().map(|s| s.n).sum();
        Ok(MeanEstimate {
            value,
            per_group,
            labels_spent: spent + extra_labels,
        })
    }
}
