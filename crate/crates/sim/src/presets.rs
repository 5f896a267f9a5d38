//! Built-in experiment presets.
//!
//! Each preset expands to one or more experiment configs (one per noise
//! level when a figure sweeps the noise parameter); multi-config presets
//! merge into a single table with the sub-config label appended to each
//! algorithm name, e.g. `partibandits[nu=0.05]`.

use std::path::PathBuf;

use crate::harness::{
    Algorithm, AlgorithmSpec, ErrorMetric, ExperimentConfig, Scenario, SchemeSpec,
};

pub const DEFAULT_SEED: u64 = 17;
const POOL_SIZE: usize = 10_000;

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    /// `(label, config)` pairs; the label suffixes algorithm names when a
    /// preset carries more than one config.
    pub configs: Vec<(String, ExperimentConfig)>,
}

fn base(scenario: Scenario, roster: Vec<AlgorithmSpec>, budgets: Vec<usize>) -> ExperimentConfig {
    ExperimentConfig {
        scenario,
        roster,
        budgets,
        replications: 500,
        percentile: 0.9,
        metric: ErrorMetric::Absolute,
        seed: DEFAULT_SEED,
        parallelism: 0,
    }
}

fn srs() -> AlgorithmSpec {
    AlgorithmSpec::new("srs", Algorithm::Srs)
}

fn partibandits() -> AlgorithmSpec {
    AlgorithmSpec::new(
        "partibandits",
        Algorithm::PartiBandits {
            subroutine: "a2-threshold".to_string(),
            tau: 0.5,
            delta: 0.1,
            c1: None,
            c2: None,
        },
    )
}

fn ws_ucb(split: f64) -> AlgorithmSpec {
    AlgorithmSpec::new(
        format!("ws-ucb@{split}"),
        Algorithm::WsUcb {
            scheme: SchemeSpec::SplitAt(split),
            tau: 0.5,
            delta: 0.1,
            c1: None,
            c2: None,
        },
    )
}

fn threshold(nu: f64) -> Scenario {
    Scenario::Threshold {
        t: 0.5,
        rho_le: nu,
        rho_gt: nu,
        pool_size: POOL_SIZE,
    }
}

fn steps(from: usize, to: usize, step: usize) -> Vec<usize> {
    (from..=to).step_by(step).collect()
}

/// All built-in presets.
pub fn all_presets() -> Vec<Preset> {
    vec![
        Preset {
            name: "fig1-left",
            summary: "PartiBandits vs SRS on the threshold pool, noise sweep 0-10%, budgets 10-100",
            configs: [0.0, 0.05, 0.10]
                .iter()
                .map(|&nu| {
                    (
                        format!("nu={nu:.2}"),
                        base(
                            threshold(nu),
                            vec![srs(), partibandits()],
                            steps(10, 100, 10),
                        ),
                    )
                })
                .collect(),
        },
        Preset {
            name: "fig1-right",
            summary: "WarmStart-UCB at splits 0.3/0.4/0.5 vs SRS, 5% noise, budgets 50-200",
            configs: vec![(
                String::new(),
                base(
                    threshold(0.05),
                    vec![srs(), ws_ucb(0.3), ws_ucb(0.4), ws_ucb(0.5)],
                    steps(50, 200, 50),
                ),
            )],
        },
        Preset {
            name: "logit",
            summary: "PartiBandits vs SRS on logistic-link pools, steepness sweep",
            configs: [0.05, 0.1, 0.2]
                .iter()
                .map(|&nu| {
                    (
                        format!("nu={nu:.2}"),
                        base(
                            Scenario::Logit {
                                nu,
                                pool_size: POOL_SIZE,
                            },
                            vec![srs(), partibandits()],
                            steps(10, 100, 10),
                        ),
                    )
                })
                .collect(),
        },
        Preset {
            name: "probit",
            summary: "PartiBandits vs SRS on probit-link pools over [-5, 5], steepness sweep",
            configs: [0.25, 1.0, 2.0]
                .iter()
                .map(|&nu| {
                    (
                        format!("nu={nu:.2}"),
                        base(
                            Scenario::Probit {
                                nu,
                                pool_size: POOL_SIZE,
                            },
                            vec![srs(), partibandits()],
                            steps(10, 100, 10),
                        ),
                    )
                })
                .collect(),
        },
        Preset {
            name: "thompson-proto",
            summary: "Beta-Bernoulli Thompson over three fixed arms p=(0.1, 0.5, 0.8), 3000 rounds",
            configs: vec![(
                String::new(),
                base(
                    Scenario::FixedArms {
                        probs: vec![0.1, 0.5, 0.8],
                    },
                    vec![AlgorithmSpec::new("thompson", Algorithm::ThompsonArms)],
                    vec![3000],
                ),
            )],
        },
        Preset {
            name: "thompson-binned",
            summary: "Thompson over 5 covariate bins vs SRS on the 5%-noise threshold pool, 3000 labels",
            configs: vec![(
                String::new(),
                base(
                    threshold(0.05),
                    vec![
                        srs(),
                        AlgorithmSpec::new("thompson@5", Algorithm::ThompsonBinned { bins: 5 }),
                    ],
                    vec![3000],
                ),
            )],
        },
        Preset {
            name: "csv-tails",
            summary: "PartiBandits vs SRS on a CSV pool restricted to the 5% covariate tails (expects pool.csv; fork via `presets --show csv-tails`)",
            configs: vec![(
                String::new(),
                base(
                    Scenario::Csv {
                        path: PathBuf::from("pool.csv"),
                        x_column: "x".to_string(),
                        y_column: "y".to_string(),
                        tail_quantile: Some(0.05),
                    },
                    vec![srs(), partibandits()],
                    steps(80, 140, 10),
                ),
            )],
        },
        Preset {
            name: "appendix-band",
            summary: "PartiBandits vs SRS on the 5%-noise threshold pool over the 80-140 budget band",
            configs: vec![(
                String::new(),
                base(
                    threshold(0.05),
                    vec![srs(), partibandits()],
                    steps(80, 140, 10),
                ),
            )],
        },
    ]
}

pub fn find_preset(name: &str) -> Option<Preset> {
    all_presets().into_iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for preset in all_presets() {
            for (label, config) in &preset.configs {
                // csv-tails points at a user-supplied file; its scenario
                // validates even though running it would need the file.
                config.validate().unwrap_or_else(|e| {
                    panic!("preset {}[{label}] invalid: {e}", preset.name)
                });
            }
        }
    }

    #[test]
    fn spec_named_presets_exist() {
        for name in [
            "fig1-left",
            "fig1-right",
            "logit",
            "probit",
            "thompson-proto",
            "thompson-binned",
            "csv-tails",
        ] {
            assert!(find_preset(name).is_some(), "missing preset {name}");
        }
    }

    #[test]
    fn fig1_right_grid_shape() {
        let preset = find_preset("fig1-right").unwrap();
        assert_eq!(preset.configs.len(), 1);
        let config = &preset.configs[0].1;
        assert_eq!(config.budgets, vec![50, 100, 150, 200]);
        assert_eq!(config.roster.len(), 4);
        assert_eq!(config.replications, 500);
    }
}
