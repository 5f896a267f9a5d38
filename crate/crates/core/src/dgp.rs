//! Synthetic data-generating processes with analytic ground truth.
//!
//! Three families, each producing a labeled pool plus a [`TrueModel`] that
//! carries the quantities simulations measure against:
//!
//! - threshold-flip: `Y = 1{X >= t}` on `Unif[0,1)` with side-specific
//!   label-flip rates,
//! - logit: `Y ~ Bernoulli(sigmoid(-1/nu + (2/nu) x))` on `Unif[0,1)`,
//! - probit: `Y ~ Bernoulli(Phi((x - 0.25)/nu))` on `Unif[-5,5)`.
//!
//! Threshold-flip analytics are closed-form; logit and probit moments are
//! computed by adaptive quadrature well below the 1e-8 tolerance the
//! harness relies on.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::math;
use crate::pool::LabeledPool;
use crate::scheme::{Interval, StratificationScheme, Stratum};
use crate::seeding;

const QUAD_TOL: f64 = 1e-11;

/// Parameter family of a synthetic process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DgpKind {
    ThresholdFlip { t: f64, rho_le: f64, rho_gt: f64 },
    Logit { nu: f64 },
    Probit { nu: f64 },
}

/// A fully specified process: family parameters plus pool size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgpSpec {
    pub kind: DgpKind,
    pub pool_size: usize,
}

/// Ground truth for a synthetic pool, relative to the process's canonical
/// two-way split at the link midpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueModel {
    /// Population mean of `Y`.
    pub mean: f64,
    /// Per-stratum conditional variances of the canonical scheme.
    pub cond_vars: Vec<f64>,
    /// Average within-group variance of the canonical scheme.
    pub sigma1: f64,
    /// Infimum squared loss over the threshold hypothesis class, when
    /// analytically available.
    pub bayes_risk: Option<f64>,
    /// Marginal variance of `Y`.
    pub var_y: f64,
}

impl DgpSpec {
    /// Checks hard parameter bounds; returns soft warnings (flip rates above
    /// 1/4 are permitted but outside the regime the guarantees target).
    pub fn validate(&self) -> Result<Vec<&'static str>> {
        let mut warnings = Vec::new();
        match self.kind {
            DgpKind::ThresholdFlip { t, rho_le, rho_gt } => {
                if !(0.0..=1.0).contains(&t) {
                    return Err(Error::Domain {
                        parameter: "t",
                        value: t,
                    });
                }
                for (name, rho) in [("rho_le", rho_le), ("rho_gt", rho_gt)] {
                    if !(0.0..=1.0).contains(&rho) {
                        return Err(Error::Domain {
                            parameter: name,
                            value: rho,
                        });
                    }
                    if rho > 0.25 {
                        warnings.push("flip rate above 1/4");
                    }
                }
            }
            DgpKind::Logit { nu } | DgpKind::Probit { nu } => {
                let nu_ok = nu > 0.0 && nu.is_finite();
                if !nu_ok {
                    return Err(Error::Domain {
                        parameter: "nu",
                        value: nu,
                    });
                }
            }
        }
        if self.pool_size == 0 {
            return Err(Error::EmptyPool);
        }
        Ok(warnings)
    }

    /// Covariate support `[lo, hi)` of the uniform law.
    pub fn support(&self) -> (f64, f64) {
        match self.kind {
            DgpKind::Probit { .. } => (-5.0, 5.0),
            _ => (0.0, 1.0),
        }
    }

    /// `P(Y = 1 | X = x)`.
    pub fn conditional_prob(&self, x: f64) -> f64 {
        match self.kind {
            DgpKind::ThresholdFlip { t, rho_le, rho_gt } => {
                if x < t {
                    rho_le
                } else if x > t {
                    1.0 - rho_gt
                } else {
                    1.0 - rho_le
                }
            }
            DgpKind::Logit { nu } => math::sigmoid(-1.0 / nu + (2.0 / nu) * x),
            DgpKind::Probit { nu } => math::normal_cdf((x - 0.25) / nu),
        }
    }

    /// Link midpoint: the covariate where `P(Y = 1 | x)` crosses one half.
    pub fn link_midpoint(&self) -> f64 {
        match self.kind {
            DgpKind::ThresholdFlip { t, .. } => t,
            DgpKind::Logit { .. } => 0.5,
            DgpKind::Probit { .. } => 0.25,
        }
    }

    /// `P(X ∈ iv)` under the uniform covariate law.
    pub fn interval_prob(&self, iv: Interval) -> f64 {
        let (lo, hi) = self.support();
        let a = iv.lo.max(lo);
        let b = iv.hi.min(hi);
        if b <= a {
            0.0
        } else {
            (b - a) / (hi - lo)
        }
    }

    /// `(P_g, E[Y | A_g], Var(Y | A_g))` for a stratum. Binary labels make
    /// the conditional distribution Bernoulli, so the variance is `m(1-m)`.
    pub fn stratum_stats(&self, stratum: &Stratum) -> (f64, f64, f64) {
        let (lo, hi) = self.support();
        let density = 1.0 / (hi - lo);
        let mut prob = 0.0;
        let mut mass = 0.0;
        for iv in &stratum.intervals {
            let a = iv.lo.max(lo);
            let b = iv.hi.min(hi);
            if b <= a {
                continue;
            }
            prob += (b - a) * density;
            mass += match self.kind {
                DgpKind::ThresholdFlip { t, rho_le, rho_gt } => {
                    let left = (b.min(t) - a).max(0.0);
                    let right = (b - a.max(t)).max(0.0);
                    (left * rho_le + right * (1.0 - rho_gt)) * density
                }
                _ => math::integrate(&|x| self.conditional_prob(x), a, b, QUAD_TOL) * density,
            };
        }
        if prob == 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let mean = mass / prob;
        (prob, mean, mean * (1.0 - mean))
    }

    /// Average within-group variance of an arbitrary scheme under this
    /// process.
    pub fn scheme_sigma1(&self, scheme: &StratificationScheme) -> f64 {
        scheme
            .strata()
            .iter()
            .map(|s| {
                let (p, _, v) = self.stratum_stats(s);
                p * v
            })
            .sum()
    }

    /// Two-way split at `s` with analytic weights.
    pub fn split_scheme(&self, s: f64) -> Result<StratificationScheme> {
        let p_left = self.interval_prob(Interval::new(f64::NEG_INFINITY, s));
        StratificationScheme::split_at(s, p_left)
    }

    /// Canonical scheme: split at the link midpoint (single stratum when
    /// the midpoint sits on the support boundary).
    pub fn canonical_scheme(&self) -> Result<StratificationScheme> {
        self.split_scheme(self.link_midpoint())
    }

    /// Ground-truth quantities relative to the canonical scheme.
    pub fn true_model(&self) -> Result<TrueModel> {
        let (lo, hi) = self.support();
        let density = 1.0 / (hi - lo);
        let mean = match self.kind {
            DgpKind::ThresholdFlip { t, rho_le, rho_gt } => {
                (1.0 - t) * (1.0 - rho_gt) + t * rho_le
            }
            _ => math::integrate(&|x| self.conditional_prob(x), lo, hi, QUAD_TOL) * density,
        };
        let bayes_risk = match self.kind {
            DgpKind::ThresholdFlip { t, rho_le, rho_gt } => t * rho_le + (1.0 - t) * rho_gt,
            _ => {
                math::integrate(
                    &|x| {
                        let p = self.conditional_prob(x);
                        p.min(1.0 - p)
                    },
                    lo,
                    hi,
                    QUAD_TOL,
                ) * density
            }
        };
        let scheme = self.canonical_scheme()?;
        let cond_vars: Vec<f64> = scheme
            .strata()
            .iter()
            .map(|s| self.stratum_stats(s).2)
            .collect();
        let sigma1 = crate::estimate::sigma1(&scheme, &cond_vars)?;
        Ok(TrueModel {
            mean,
            cond_vars,
            sigma1,
            bayes_risk: Some(bayes_risk),
            var_y: mean * (1.0 - mean),
        })
    }

    /// Generates the pool: iid uniform covariates, labels drawn from the
    /// conditional law, one `(x, u)` draw pair per point so that runs with
    /// equal seeds but different noise parameters stay coupled.
    pub fn generate(&self, seed: u64) -> Result<(LabeledPool, TrueModel)> {
        self.validate()?;
        let (lo, hi) = self.support();
        let mut rng = seeding::stream(seed, &[]);
        let m = self.pool_size;
        let mut xs = Vec::with_capacity(m);
        let mut ys = Vec::with_capacity(m);
        for _ in 0..m {
            let x = lo + (hi - lo) * rng.random::<f64>();
            let u = rng.random::<f64>();
            let y = match self.kind {
                DgpKind::ThresholdFlip { t, rho_le, rho_gt } => {
                    let base = if x >= t { 1.0 } else { 0.0 };
                    let rate = if x <= t { rho_le } else { rho_gt };
                    if u < rate {
                        1.0 - base
                    } else {
                        base
                    }
                }
                _ => {
                    if u < self.conditional_prob(x) {
                        1.0
                    } else {
                        0.0
                    }
                }
            };
            xs.push(x);
            ys.push(y);
        }
        let pool = LabeledPool::with_alphabet(xs, ys, alloc::vec![0.0, 1.0], seed)?;
        Ok((pool, self.true_model()?))
    }
}

/// Convenience constructors mirroring the three families.
pub fn gen_threshold_pool(
    t: f64,
    rho_le: f64,
    rho_gt: f64,
    pool_size: usize,
    seed: u64,
) -> Result<(LabeledPool, TrueModel)> {
    DgpSpec {
        kind: DgpKind::ThresholdFlip { t, rho_le, rho_gt },
        pool_size,
    }
    .generate(seed)
}

pub fn gen_logit_pool(nu: f64, pool_size: usize, seed: u64) -> Result<(LabeledPool, TrueModel)> {
    DgpSpec {
        kind: DgpKind::Logit { nu },
        pool_size,
    }
    .generate(seed)
}

pub fn gen_probit_pool(nu: f64, pool_size: usize, seed: u64) -> Result<(LabeledPool, TrueModel)> {
    DgpSpec {
        kind: DgpKind::Probit { nu },
        pool_size,
    }
    .generate(seed)
}
