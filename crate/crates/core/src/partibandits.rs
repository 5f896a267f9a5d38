//! PartiBandits: two-stage population mean estimation under one budget.
//!
//! Stage 1 hands half the budget to a stage-1 subroutine and turns the
//! learned classifier's preimages into a stratification. Stage 2 spends the
//! rest running WarmStart-UCB over that stratification on the same oracle;
//! stage-1 points are never redrawn and stage-1 labels never enter the
//! stage-2 estimate, keeping it unbiased.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::estimate::MeanEstimate;
use crate::pool::LabelOracle;
use crate::scheme::StratificationScheme;
use crate::stage1::{induced_partition, plugin_subroutine, SubroutineResult};
use crate::trace::SamplerTrace;
use crate::ucb::{run_warmstart_ucb, WsUcbParams};

/// Configuration of one PartiBandits run.
#[derive(Debug, Clone, PartialEq)]
pub struct PartiBanditsConfig {
    /// Registered stage-1 subroutine name.
    pub subroutine: alloc::string::String,
    /// Total label budget `N`.
    pub budget: usize,
    /// Confidence level, forwarded unsplit to both stages.
    pub delta: f64,
    /// Stage-2 warm-start buffer fraction.
    pub tau: f64,
    /// Sub-gaussian constant overrides; alphabet-derived defaults otherwise.
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    /// Stage-1 budget override; `floor(N/2)` otherwise.
    pub stage1_budget: Option<usize>,
}

impl PartiBanditsConfig {
    pub fn new(subroutine: &str, budget: usize) -> Self {
        PartiBanditsConfig {
            subroutine: alloc::string::String::from(subroutine),
            budget,
            delta: 0.1,
            tau: 0.5,
            c1: None,
            c2: None,
            stage1_budget: None,
        }
    }

    fn split(&self) -> Result<(usize, usize)> {
        let stage1 = self.stage1_budget.unwrap_or(self.budget / 2);
        if stage1 >= self.budget || self.budget - stage1 == 0 {
            return Err(Error::Domain {
                parameter: "stage1_budget",
                value: stage1 as f64,
            });
        }
        Ok((stage1, self.budget - stage1))
    }
}

/// Everything a PartiBandits run produces, for estimates, audit and replay.
#[derive(Debug)]
pub struct PartiBanditsRun {
    pub estimate: MeanEstimate,
    pub scheme: StratificationScheme,
    pub stage1: SubroutineResult,
    pub stage2_trace: SamplerTrace,
    /// Strata merged away because the stage-2 budget could not cover them.
    pub coarsening_merges: usize,
}

/// Runs both stages against one oracle. Stage 1 consumes at most
/// `floor(N/2)` labels; stage 2 gets exactly the remainder. If the learned
/// scheme has more strata than the stage-2 budget can cover, the smallest
/// strata are merged into their neighbors rather than failing the run.
pub fn run_partibandits(
    oracle: &mut LabelOracle<'_>,
    config: &PartiBanditsConfig,
    rng: &mut dyn RngCore,
) -> Result<PartiBanditsRun> {
    let (stage1_budget, stage2_budget) = config.split()?;
    if oracle.remaining_budget() < config.budget {
        return Err(Error::BudgetExhausted);
    }

    let subroutine = plugin_subroutine(&config.subroutine)?;
    let stage1 = subroutine.run(oracle, stage1_budget, config.delta, rng)?;
    debug_assert!(stage1.labels_spent <= stage1_budget);

    let mut scheme = induced_partition(&stage1.classifier, oracle.pool())?;
    let coarsening_merges = if scheme.len() > stage2_budget {
        scheme.coarsen_to(stage2_budget)
    } else {
        0
    };

    let k = oracle.pool().classes_minus_one();
    let mut params = WsUcbParams::new(stage2_budget, k)
        .with_tau(config.tau)
        .with_delta(config.delta);
    if let Some(c1) = config.c1 {
        params.c1 = c1;
    }
    if let Some(c2) = config.c2 {
        params.c2 = c2;
    }

    let (stage2_estimate, stage2_trace) = run_warmstart_ucb(oracle, &scheme, params, rng)?;

    let estimate = MeanEstimate {
        value: stage2_estimate.value,
        per_group: stage2_estimate.per_group,
        labels_spent: stage1.labels_spent + stage2_estimate.labels_spent,
    };
    Ok(PartiBanditsRun {
        estimate,
        scheme,
        stage1,
        stage2_trace,
        coarsening_merges,
    })
}
