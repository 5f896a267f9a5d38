//! The Monte Carlo experiment engine.

use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;

use partibandits_core::baselines::{
    run_srs, run_strs, run_thompson_arms, run_thompson_binned, ThompsonConfig,
};
use partibandits_core::dgp::{DgpKind, DgpSpec};
use partibandits_core::partibandits::{run_partibandits, PartiBanditsConfig};
use partibandits_core::seeding;
use partibandits_core::ucb::{run_warmstart_ucb, WsUcbParams};
use partibandits_core::{
    Interval, LabelOracle, LabeledPool, MeanEstimate, SamplerTrace, StratificationScheme,
};

use crate::csv_pool::load_csv_pool;
use crate::SimError;

/// Stream tags: pools derive from `(seed, POOL, rep)`, algorithm runs from
/// `(seed, RUN, algorithm index, budget, rep)`.
const POOL_TAG: u64 = 0x706f;
const RUN_TAG: u64 = 0x72756e;

/// What the experiment samples from.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Threshold {
        t: f64,
        rho_le: f64,
        rho_gt: f64,
        pool_size: usize,
    },
    Logit {
        nu: f64,
        pool_size: usize,
    },
    Probit {
        nu: f64,
        pool_size: usize,
    },
    Csv {
        path: PathBuf,
        x_column: String,
        y_column: String,
        tail_quantile: Option<f64>,
    },
    /// Synthetic Bernoulli arms with equal weights; no pool.
    FixedArms { probs: Vec<f64> },
}

impl Scenario {
    fn dgp(&self) -> Option<DgpSpec> {
        match *self {
            Scenario::Threshold {
                t,
                rho_le,
                rho_gt,
                pool_size,
            } => Some(DgpSpec {
                kind: DgpKind::ThresholdFlip { t, rho_le, rho_gt },
                pool_size,
            }),
            Scenario::Logit { nu, pool_size } => Some(DgpSpec {
                kind: DgpKind::Logit { nu },
                pool_size,
            }),
            Scenario::Probit { nu, pool_size } => Some(DgpSpec {
                kind: DgpKind::Probit { nu },
                pool_size,
            }),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<Vec<String>, SimError> {
        match self {
            Scenario::Csv { tail_quantile, .. } => {
                if let Some(q) = tail_quantile {
                    if !(*q > 0.0 && *q < 0.5) {
                        return Err(SimError::config(
                            "scenario.tail_quantile",
                            format!("must lie in (0, 0.5), got {q}"),
                        ));
                    }
                }
                Ok(Vec::new())
            }
            Scenario::FixedArms { probs } => {
                if probs.is_empty() {
                    return Err(SimError::config("scenario.probs", "needs at least one arm"));
                }
                for &p in probs {
                    if !(0.0..=1.0).contains(&p) {
                        return Err(SimError::config(
                            "scenario.probs",
                            format!("arm probability {p} outside [0, 1]"),
                        ));
                    }
                }
                Ok(Vec::new())
            }
            _ => {
                let spec = self.dgp().expect("synthetic scenario");
                let warnings = spec.validate().map_err(|e| match e {
                    partibandits_core::Error::Domain { parameter, value } => SimError::config(
                        &format!("scenario.{parameter}"),
                        format!("value {value} outside its domain"),
                    ),
                    other => SimError::from(other),
                })?;
                Ok(warnings.into_iter().map(String::from).collect())
            }
        }
    }
}

/// Scenario with one-time preparation done (CSV loaded, truth computed).
enum Prepared {
    Synthetic { spec: DgpSpec, true_mean: f64 },
    Shared { pool: Arc<LabeledPool>, true_mean: f64 },
    Arms { probs: Vec<f64>, true_mean: f64 },
}

impl Prepared {
    fn build(scenario: &Scenario) -> Result<Self, SimError> {
        match scenario {
            Scenario::Csv {
                path,
                x_column,
                y_column,
                tail_quantile,
            } => {
                let pool = load_csv_pool(path, x_column, y_column, *tail_quantile)?;
                let true_mean = pool.census_mean();
                Ok(Prepared::Shared {
                    pool: Arc::new(pool),
                    true_mean,
                })
            }
            Scenario::FixedArms { probs } => Ok(Prepared::Arms {
                probs: probs.clone(),
                true_mean: probs.iter().sum::<f64>() / probs.len() as f64,
            }),
            _ => {
                let spec = scenario.dgp().expect("synthetic scenario");
                let true_mean = spec.true_model()?.mean;
                Ok(Prepared::Synthetic { spec, true_mean })
            }
        }
    }

    fn true_mean(&self) -> f64 {
        match self {
            Prepared::Synthetic { true_mean, .. }
            | Prepared::Shared { true_mean, .. }
            | Prepared::Arms { true_mean, .. } => *true_mean,
        }
    }

    fn pool_for(&self, pool_seed: u64) -> Result<Option<Arc<LabeledPool>>, SimError> {
        match self {
            Prepared::Synthetic { spec, .. } => {
                let (pool, _) = spec.generate(pool_seed)?;
                Ok(Some(Arc::new(pool)))
            }
            Prepared::Shared { pool, .. } => Ok(Some(pool.clone())),
            Prepared::Arms { .. } => Ok(None),
        }
    }
}

/// How a pre-stratified algorithm builds its scheme. Weights are analytic
/// for synthetic scenarios and empirical pool fractions for file-loaded
/// ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeSpec {
    Single,
    SplitAt(f64),
    EqualBins(usize),
}

impl SchemeSpec {
    fn build(
        &self,
        prepared: &Prepared,
        pool: &LabeledPool,
    ) -> Result<StratificationScheme, SimError> {
        let scheme = match (*self, prepared) {
            (SchemeSpec::Single, _) => StratificationScheme::single(),
            (SchemeSpec::SplitAt(s), Prepared::Synthetic { spec, .. }) => spec.split_scheme(s)?,
            (SchemeSpec::SplitAt(s), _) => {
                let count = pool.xs().iter().filter(|&&x| x < s).count();
                StratificationScheme::split_at(s, count as f64 / pool.len() as f64)?
            }
            (SchemeSpec::EqualBins(k), Prepared::Synthetic { spec, .. }) => {
                let (lo, hi) = spec.support();
                StratificationScheme::equal_bins(lo, hi, k)?
            }
            (SchemeSpec::EqualBins(k), _) => {
                let (lo, hi) = pool.support();
                // Half-open bins: stretch the top edge so the max point is
                // covered, then weight bins empirically.
                let hi = hi + (hi - lo).max(f64::MIN_POSITIVE) / pool.len() as f64;
                let width = (hi - lo) / k as f64;
                let mut parts: Vec<(Vec<Interval>, f64)> = (0..k)
                    .map(|i| {
                        let a = if i == 0 {
                            f64::NEG_INFINITY
                        } else {
                            lo + i as f64 * width
                        };
                        let b = if i == k - 1 {
                            f64::INFINITY
                        } else {
                            lo + (i + 1) as f64 * width
                        };
                        (vec![Interval::new(a, b)], 0.0)
                    })
                    .collect();
                for &x in pool.xs() {
                    let part = parts
                        .iter()
                        .position(|(ivs, _)| ivs[0].contains(x))
                        .expect("bins cover the line");
                    parts[part].1 += 1.0;
                }
                for part in &mut parts {
                    part.1 /= pool.len() as f64;
                }
                StratificationScheme::new(parts, partibandits_core::Provenance::APriori)?
            }
        };
        Ok(scheme)
    }
}

/// One rostered algorithm.
#[derive(Debug, Clone, PartialEq)]
pub enum Algorithm {
    Srs,
    Strs {
        scheme: SchemeSpec,
    },
    WsUcb {
        scheme: SchemeSpec,
        tau: f64,
        delta: f64,
        c1: Option<f64>,
        c2: Option<f64>,
    },
    PartiBandits {
        subroutine: String,
        tau: f64,
        delta: f64,
        c1: Option<f64>,
        c2: Option<f64>,
    },
    ThompsonBinned {
        bins: usize,
    },
    ThompsonArms,
}

/// Algorithm plus its display name (the CSV series key).
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSpec {
    pub name: String,
    pub algorithm: Algorithm,
}

impl AlgorithmSpec {
    pub fn new(name: impl Into<String>, algorithm: Algorithm) -> Self {
        AlgorithmSpec {
            name: name.into(),
            algorithm,
        }
    }

    fn validate(&self, index: usize, scenario: &Scenario) -> Result<(), SimError> {
        let field = format!("algorithms[{index}]");
        let arms_scenario = matches!(scenario, Scenario::FixedArms { .. });
        match &self.algorithm {
            Algorithm::ThompsonArms => {
                if !arms_scenario {
                    return Err(SimError::config(
                        &field,
                        "thompson over fixed arms requires the fixed-arms scenario",
                    ));
                }
            }
            other => {
                if arms_scenario {
                    return Err(SimError::config(
                        &field,
                        "the fixed-arms scenario only supports thompson",
                    ));
                }
                match other {
                    Algorithm::WsUcb { tau, delta, .. }
                    | Algorithm::PartiBandits { tau, delta, .. } => {
                        if !(0.0..=1.0).contains(tau) {
                            return Err(SimError::config(
                                &format!("{field}.tau"),
                                format!("must lie in [0, 1], got {tau}"),
                            ));
                        }
                        if !(*delta > 0.0 && *delta < 1.0) {
                            return Err(SimError::config(
                                &format!("{field}.delta"),
                                format!("must lie in (0, 1), got {delta}"),
                            ));
                        }
                        if let Algorithm::PartiBandits { subroutine, .. } = other {
                            partibandits_core::stage1::plugin_subroutine(subroutine).map_err(
                                |err| {
                                    SimError::config(
                                        &format!("{field}.subroutine"),
                                        err.to_string(),
                                    )
                                },
                            )?;
                        }
                    }
                    Algorithm::ThompsonBinned { bins: 0 } => {
                        return Err(SimError::config(
                            &format!("{field}.bins"),
                            "needs at least one bin",
                        ));
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

/// Per-replication error metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorMetric {
    Squared,
    Absolute,
}

impl ErrorMetric {
    pub fn apply(&self, estimate: f64, truth: f64) -> f64 {
        let d = estimate - truth;
        match self {
            ErrorMetric::Squared => d * d,
            ErrorMetric::Absolute => d.abs(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ErrorMetric::Squared => "squared",
            ErrorMetric::Absolute => "absolute",
        }
    }
}

/// Full experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub roster: Vec<AlgorithmSpec>,
    pub budgets: Vec<usize>,
    pub replications: usize,
    pub percentile: f64,
    pub metric: ErrorMetric,
    pub seed: u64,
    /// Worker threads; 0 lets the runtime choose. Results do not depend on
    /// this value.
    pub parallelism: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<Vec<String>, SimError> {
        let warnings = self.scenario.validate()?;
        if self.replications == 0 {
            return Err(SimError::config("replications", "must be at least 1"));
        }
        if !(self.percentile > 0.0 && self.percentile < 1.0) {
            return Err(SimError::config(
                "percentile",
                format!("must lie in (0, 1), got {}", self.percentile),
            ));
        }
        if self.budgets.is_empty() {
            return Err(SimError::config("budgets", "must not be empty"));
        }
        if !self.budgets.windows(2).all(|w| w[0] < w[1]) {
            return Err(SimError::config("budgets", "must be strictly increasing"));
        }
        if self.roster.is_empty() {
            return Err(SimError::config("algorithms", "roster must not be empty"));
        }
        for (i, spec) in self.roster.iter().enumerate() {
            spec.validate(i, &self.scenario)?;
        }
        Ok(warnings)
    }
}

/// One aggregated cell of the experiment grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub algorithm: String,
    pub budget: usize,
    pub percentile_error: f64,
    pub mean_error: f64,
    pub sem: f64,
    pub replications: usize,
    pub seed: u64,
}

/// All cells, sorted by `(algorithm, budget)`, plus the metric and
/// percentile they were aggregated under.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    pub metric: ErrorMetric,
    pub percentile: f64,
}

impl ResultTable {
    pub fn sort(&mut self) {
        self.rows
            .sort_by(|a, b| a.algorithm.cmp(&b.algorithm).then(a.budget.cmp(&b.budget)));
    }

    /// Merges another table (same metric/percentile), optionally suffixing
    /// its algorithm names, and re-sorts.
    pub fn merge(&mut self, other: ResultTable, suffix: Option<&str>) {
        for mut row in other.rows {
            if let Some(sfx) = suffix {
                row.algorithm = format!("{}[{}]", row.algorithm, sfx);
            }
            self.rows.push(row);
        }
        self.sort();
    }

    pub fn row(&self, algorithm: &str, budget: usize) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.algorithm == algorithm && r.budget == budget)
    }
}

/// Nearest-rank percentile: sort ascending, take the element at index
/// `ceil(q * n) - 1`.
pub fn percentile(values: &[f64], q: f64) -> Result<f64, SimError> {
    if values.is_empty() {
        return Err(SimError::config("percentile input", "must not be empty"));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(SimError::config(
            "q",
            format!("must lie in (0, 1), got {q}"),
        ));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = (q * sorted.len() as f64).ceil() as usize;
    Ok(sorted[rank.max(1) - 1])
}

struct RunOutput {
    estimate: MeanEstimate,
    traces: Vec<(&'static str, SamplerTrace)>,
}

fn run_algorithm(
    prepared: &Prepared,
    spec: &AlgorithmSpec,
    budget: usize,
    pool: Option<&LabeledPool>,
    rng: &mut seeding::ChaCha8Rng,
) -> Result<RunOutput, SimError> {
    let out = match (&spec.algorithm, prepared) {
        (Algorithm::ThompsonArms, Prepared::Arms { probs, .. }) => {
            let (estimate, trace, _) =
                run_thompson_arms(probs, &ThompsonConfig::default(), budget, rng)?;
            RunOutput {
                estimate,
                traces: vec![("thompson", trace)],
            }
        }
        (algorithm, _) => {
            let pool = pool.expect("pool-backed algorithm");
            let mut oracle = LabelOracle::new(pool, budget);
            match algorithm {
                Algorithm::Srs => {
                    let (estimate, trace) = run_srs(&mut oracle, budget, rng)?;
                    RunOutput {
                        estimate,
                        traces: vec![("srs", trace)],
                    }
                }
                Algorithm::Strs { scheme } => {
                    let scheme = scheme.build(prepared, pool)?;
                    let (estimate, trace) = run_strs(&mut oracle, &scheme, budget, rng)?;
                    RunOutput {
                        estimate,
                        traces: vec![("strs", trace)],
                    }
                }
                Algorithm::WsUcb {
                    scheme,
                    tau,
                    delta,
                    c1,
                    c2,
                } => {
                    let scheme = scheme.build(prepared, pool)?;
                    let mut params = WsUcbParams::new(budget, pool.classes_minus_one())
                        .with_tau(*tau)
                        .with_delta(*delta);
                    if let Some(c1) = c1 {
                        params.c1 = *c1;
                    }
                    if let Some(c2) = c2 {
                        params.c2 = *c2;
                    }
                    let (estimate, trace) =
                        run_warmstart_ucb(&mut oracle, &scheme, params, rng)?;
                    RunOutput {
                        estimate,
                        traces: vec![("ws-ucb", trace)],
                    }
                }
                Algorithm::PartiBandits {
                    subroutine,
                    tau,
                    delta,
                    c1,
                    c2,
                } => {
                    let mut config = PartiBanditsConfig::new(subroutine, budget);
                    config.tau = *tau;
                    config.delta = *delta;
                    config.c1 = *c1;
                    config.c2 = *c2;
                    let run = run_partibandits(&mut oracle, &config, rng)?;
                    RunOutput {
                        estimate: run.estimate,
                        traces: vec![
                            ("stage1", run.stage1.trace),
                            ("stage2", run.stage2_trace),
                        ],
                    }
                }
                Algorithm::ThompsonBinned { bins } => {
                    let scheme = SchemeSpec::EqualBins(*bins).build(prepared, pool)?;
                    let (estimate, trace) = run_thompson_binned(
                        &mut oracle,
                        &scheme,
                        &ThompsonConfig::default(),
                        budget,
                        rng,
                    )?;
                    RunOutput {
                        estimate,
                        traces: vec![("thompson", trace)],
                    }
                }
                Algorithm::ThompsonArms => {
                    return Err(SimError::config(
                        "algorithms",
                        "thompson over fixed arms requires the fixed-arms scenario",
                    ));
                }
            }
        }
    };
    Ok(out)
}

fn replication_error(
    prepared: &Prepared,
    config: &ExperimentConfig,
    algo_index: usize,
    budget: usize,
    rep: usize,
) -> Result<f64, SimError> {
    let spec = &config.roster[algo_index];
    let pool_seed = seeding::derive_seed(config.seed, &[POOL_TAG, rep as u64]);
    let run_seed = seeding::derive_seed(
        config.seed,
        &[RUN_TAG, algo_index as u64, budget as u64, rep as u64],
    );
    let wrap = |source: SimError| match source {
        SimError::Core(source) => SimError::Replication {
            algorithm: spec.name.clone(),
            budget,
            replication: rep,
            seed: config.seed,
            source,
        },
        other => other,
    };
    let pool = prepared.pool_for(pool_seed).map_err(wrap)?;
    let mut rng = seeding::rng_from_seed(run_seed);
    let output =
        run_algorithm(prepared, spec, budget, pool.as_deref(), &mut rng).map_err(wrap)?;
    Ok(config
        .metric
        .apply(output.estimate.value, prepared.true_mean()))
}

/// Runs the full grid. Replications execute in parallel up to
/// `config.parallelism` workers; the aggregation is a sequential reduce
/// over replication order, so the table is independent of thread count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultTable, SimError> {
    config.validate()?;
    let prepared = Prepared::build(&config.scenario)?;
    let reps = config.replications;

    let cells: Vec<(usize, usize)> = (0..config.roster.len())
        .flat_map(|ai| config.budgets.iter().map(move |&b| (ai, b)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| SimError::config("parallelism", e.to_string()))?;

    let mut rows = Vec::with_capacity(cells.len());
    for (ai, budget) in cells {
        let errors: Vec<f64> = pool.install(|| {
            (0..reps)
                .into_par_iter()
                .map(|rep| replication_error(&prepared, config, ai, budget, rep))
                .collect::<Result<Vec<f64>, SimError>>()
        })?;
        let mean = errors.iter().sum::<f64>() / reps as f64;
        let sem = if reps > 1 {
            let var = errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>()
                / (reps - 1) as f64;
            (var / reps as f64).sqrt()
        } else {
            0.0
        };
        rows.push(ResultRow {
            algorithm: config.roster[ai].name.clone(),
            budget,
            percentile_error: percentile(&errors, config.percentile)?,
            mean_error: mean,
            sem,
            replications: reps,
            seed: config.seed,
        });
    }

    let mut table = ResultTable {
        rows,
        metric: config.metric,
        percentile: config.percentile,
    };
    table.sort();
    Ok(table)
}

/// Re-runs one `(algorithm, budget, replication)` coordinate and returns
/// its traces for inspection.
pub struct ReplayReport {
    pub algorithm: String,
    pub budget: usize,
    pub replication: usize,
    pub estimate: MeanEstimate,
    pub true_mean: f64,
    pub error: f64,
    pub traces: Vec<(&'static str, SamplerTrace)>,
}

pub fn replay(
    config: &ExperimentConfig,
    algorithm: &str,
    budget: usize,
    rep: usize,
) -> Result<ReplayReport, SimError> {
    config.validate()?;
    let algo_index = config
        .roster
        .iter()
        .position(|s| s.name == algorithm)
        .ok_or_else(|| {
            SimError::config(
                "algo",
                format!(
                    "`{algorithm}` is not in the roster ({})",
                    config
                        .roster
                        .iter()
                        .map(|s| s.name.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            )
        })?;
    if rep >= config.replications {
        return Err(SimError::config(
            "rep",
            format!("replication {rep} outside 0..{}", config.replications),
        ));
    }
    let prepared = Prepared::build(&config.scenario)?;
    let pool_seed = seeding::derive_seed(config.seed, &[POOL_TAG, rep as u64]);
    let run_seed = seeding::derive_seed(
        config.seed,
        &[RUN_TAG, algo_index as u64, budget as u64, rep as u64],
    );
    let pool = prepared.pool_for(pool_seed)?;
    let mut rng = seeding::rng_from_seed(run_seed);
    let output = run_algorithm(
        &prepared,
        &config.roster[algo_index],
        budget,
        pool.as_deref(),
        &mut rng,
    )?;
    let true_mean = prepared.true_mean();
    Ok(ReplayReport {
        algorithm: algorithm.to_string(),
        budget,
        replication: rep,
        error: config.metric.apply(output.estimate.value, true_mean),
        estimate: output.estimate,
        true_mean,
        traces: output.traces,
    })
}

/// Formats with 12 significant digits in plain decimal notation.
pub fn format_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (DIGITS - 1 - exponent).max(0) as usize;
    format!("{:.*}", decimals, x)
}

/// Renders the table: a self-describing comment line, the fixed header,
/// then one row per cell in `(algorithm, budget)` order.
pub fn render_csv(table: &ResultTable) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# metric={} percentile={}\n",
        table.metric.name(),
        table.percentile
    ));
    out.push_str("algorithm,budget,percentile_error,mean_error,sem,replications,seed\n");
    for row in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.algorithm,
            row.budget,
            format_sig(row.percentile_error),
            format_sig(row.mean_error),
            format_sig(row.sem),
            row.replications,
            row.seed
        ));
    }
    out
}

/// Writes the rendered table to `path`.
pub fn emit_csv(table: &ResultTable, path: &std::path::Path) -> Result<(), SimError> {
    std::fs::write(path, render_csv(table))?;
    Ok(())
}
