//! Declarative TOML experiment configs (the `--config` format, and the
//! printable form of presets).

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::harness::{
    Algorithm, AlgorithmSpec, ErrorMetric, ExperimentConfig, Scenario, SchemeSpec,
};
use crate::presets::DEFAULT_SEED;
use crate::SimError;

fn default_pool_size() -> usize {
    10_000
}
fn default_percentile() -> f64 {
    0.9
}
fn default_tau() -> f64 {
    0.5
}
fn default_delta() -> f64 {
    0.1
}
fn default_subroutine() -> String {
    "a2-threshold".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub budgets: Vec<usize>,
    pub replications: usize,
    #[serde(default = "default_percentile")]
    pub percentile: f64,
    #[serde(default)]
    pub metric: MetricName,
    #[serde(default)]
    pub parallelism: usize,
    pub scenario: ScenarioFile,
    pub algorithms: Vec<AlgorithmFile>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricName {
    Squared,
    #[default]
    Absolute,
}

impl From<MetricName> for ErrorMetric {
    fn from(m: MetricName) -> Self {
        match m {
            MetricName::Squared => ErrorMetric::Squared,
            MetricName::Absolute => ErrorMetric::Absolute,
        }
    }
}

impl From<ErrorMetric> for MetricName {
    fn from(m: ErrorMetric) -> Self {
        match m {
            ErrorMetric::Squared => MetricName::Squared,
            ErrorMetric::Absolute => MetricName::Absolute,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScenarioFile {
    Threshold {
        t: f64,
        rho_le: f64,
        rho_gt: f64,
        #[serde(default = "default_pool_size")]
        pool_size: usize,
    },
    Logit {
        nu: f64,
        #[serde(default = "default_pool_size")]
        pool_size: usize,
    },
    Probit {
        nu: f64,
        #[serde(default = "default_pool_size")]
        pool_size: usize,
    },
    Csv {
        path: PathBuf,
        x_column: String,
        y_column: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tail_quantile: Option<f64>,
    },
    FixedArms {
        probs: Vec<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AlgorithmFile {
    Srs {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    Strs {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        split: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bins: Option<usize>,
    },
    WsUcb {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        split: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bins: Option<usize>,
        #[serde(default = "default_tau")]
        tau: f64,
        #[serde(default = "default_delta")]
        delta: f64,
        /// Sub-gaussian constant overrides; alphabet-derived otherwise.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c1: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c2: Option<f64>,
    },
    Partibandits {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        #[serde(default = "default_subroutine")]
        subroutine: String,
        #[serde(default = "default_tau")]
        tau: f64,
        #[serde(default = "default_delta")]
        delta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c1: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c2: Option<f64>,
    },
    Thompson {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        /// Covariate bins for pool scenarios; omit for fixed-arms.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bins: Option<usize>,
    },
}

fn scheme_of(
    field: &str,
    split: Option<f64>,
    bins: Option<usize>,
) -> Result<SchemeSpec, SimError> {
    match (split, bins) {
        (Some(_), Some(_)) => Err(SimError::config(
            field,
            "give either `split` or `bins`, not both",
        )),
        (Some(s), None) => Ok(SchemeSpec::SplitAt(s)),
        (None, Some(k)) => Ok(SchemeSpec::EqualBins(k)),
        (None, None) => Ok(SchemeSpec::Single),
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, SimError> {
        toml::from_str(text).map_err(|e| SimError::config("config", e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            SimError::config("config", format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn into_experiment(self) -> Result<ExperimentConfig, SimError> {
        let scenario = match self.scenario {
            ScenarioFile::Threshold {
                t,
                rho_le,
                rho_gt,
                pool_size,
            } => Scenario::Threshold {
                t,
                rho_le,
                rho_gt,
                pool_size,
            },
            ScenarioFile::Logit { nu, pool_size } => Scenario::Logit { nu, pool_size },
            ScenarioFile::Probit { nu, pool_size } => Scenario::Probit { nu, pool_size },
            ScenarioFile::Csv {
                path,
                x_column,
                y_column,
                tail_quantile,
            } => Scenario::Csv {
                path,
                x_column,
                y_column,
                tail_quantile,
            },
            ScenarioFile::FixedArms { probs } => Scenario::FixedArms { probs },
        };

        let mut roster = Vec::with_capacity(self.algorithms.len());
        for (i, algo) in self.algorithms.into_iter().enumerate() {
            let field = format!("algorithms[{i}]");
            let spec = match algo {
                AlgorithmFile::Srs { name } => {
                    AlgorithmSpec::new(name.unwrap_or_else(|| "srs".into()), Algorithm::Srs)
                }
                AlgorithmFile::Strs { name, split, bins } => {
                    let scheme = scheme_of(&field, split, bins)?;
                    let default = match scheme {
                        SchemeSpec::SplitAt(s) => format!("strs@{s}"),
                        SchemeSpec::EqualBins(k) => format!("strs@{k}bins"),
                        SchemeSpec::Single => "strs".to_string(),
                    };
                    AlgorithmSpec::new(name.unwrap_or(default), Algorithm::Strs { scheme })
                }
                AlgorithmFile::WsUcb {
                    name,
                    split,
                    bins,
                    tau,
                    delta,
                    c1,
                    c2,
                } => {
                    let scheme = scheme_of(&field, split, bins)?;
                    let default = match scheme {
                        SchemeSpec::SplitAt(s) => format!("ws-ucb@{s}"),
                        SchemeSpec::EqualBins(k) => format!("ws-ucb@{k}bins"),
                        SchemeSpec::Single => "ws-ucb".to_string(),
                    };
                    AlgorithmSpec::new(
                        name.unwrap_or(default),
                        Algorithm::WsUcb {
                            scheme,
                            tau,
                            delta,
                            c1,
                            c2,
                        },
                    )
                }
                AlgorithmFile::Partibandits {
                    name,
                    subroutine,
                    tau,
                    delta,
                    c1,
                    c2,
                } => AlgorithmSpec::new(
                    name.unwrap_or_else(|| "partibandits".into()),
                    Algorithm::PartiBandits {
                        subroutine,
                        tau,
                        delta,
                        c1,
                        c2,
                    },
                ),
                AlgorithmFile::Thompson { name, bins } => match bins {
                    Some(bins) => AlgorithmSpec::new(
                        name.unwrap_or_else(|| format!("thompson@{bins}")),
                        Algorithm::ThompsonBinned { bins },
                    ),
                    None => AlgorithmSpec::new(
                        name.unwrap_or_else(|| "thompson".into()),
                        Algorithm::ThompsonArms,
                    ),
                },
            };
            roster.push(spec);
        }

        Ok(ExperimentConfig {
            scenario,
            roster,
            budgets: self.budgets,
            replications: self.replications,
            percentile: self.percentile,
            metric: self.metric.into(),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            parallelism: self.parallelism,
        })
    }

    /// Rebuilds the file form of an in-memory config (used by
    /// `presets --show`).
    pub fn from_experiment(config: &ExperimentConfig) -> Self {
        let scenario = match &config.scenario {
            Scenario::Threshold {
                t,
                rho_le,
                rho_gt,
                pool_size,
            } => ScenarioFile::Threshold {
                t: *t,
                rho_le: *rho_le,
                rho_gt: *rho_gt,
                pool_size: *pool_size,
            },
            Scenario::Logit { nu, pool_size } => ScenarioFile::Logit {
                nu: *nu,
                pool_size: *pool_size,
            },
            Scenario::Probit { nu, pool_size } => ScenarioFile::Probit {
                nu: *nu,
                pool_size: *pool_size,
            },
            Scenario::Csv {
                path,
                x_column,
                y_column,
                tail_quantile,
            } => ScenarioFile::Csv {
                path: path.clone(),
                x_column: x_column.clone(),
                y_column: y_column.clone(),
                tail_quantile: *tail_quantile,
            },
            Scenario::FixedArms { probs } => ScenarioFile::FixedArms {
                probs: probs.clone(),
            },
        };
        let algorithms = config
            .roster
            .iter()
            .map(|spec| {
                let name = Some(spec.name.clone());
                match &spec.algorithm {
                    Algorithm::Srs => AlgorithmFile::Srs { name },
                    Algorithm::Strs { scheme } => {
                        let (split, bins) = scheme_fields(*scheme);
                        AlgorithmFile::Strs { name, split, bins }
                    }
                    Algorithm::WsUcb {
                        scheme,
                        tau,
                        delta,
                        c1,
                        c2,
                    } => {
                        let (split, bins) = scheme_fields(*scheme);
                        AlgorithmFile::WsUcb {
                            name,
                            split,
                            bins,
                            tau: *tau,
                            delta: *delta,
                            c1: *c1,
                            c2: *c2,
                        }
                    }
                    Algorithm::PartiBandits {
                        subroutine,
                        tau,
                        delta,
                        c1,
                        c2,
                    } => AlgorithmFile::Partibandits {
                        name,
                        subroutine: subroutine.clone(),
                        tau: *tau,
                        delta: *delta,
                        c1: *c1,
                        c2: *c2,
                    },
                    Algorithm::ThompsonBinned { bins } => AlgorithmFile::Thompson {
                        name,
                        bins: Some(*bins),
                    },
                    Algorithm::ThompsonArms => AlgorithmFile::Thompson { name, bins: None },
                }
            })
            .collect();
        ConfigFile {
            seed: Some(config.seed),
            budgets: config.budgets.clone(),
            replications: config.replications,
            percentile: config.percentile,
            metric: config.metric.into(),
            parallelism: config.parallelism,
            scenario,
            algorithms,
        }
    }
}

fn scheme_fields(scheme: SchemeSpec) -> (Option<f64>, Option<usize>) {
    match scheme {
        SchemeSpec::Single => (None, None),
        SchemeSpec::SplitAt(s) => (Some(s), None),
        SchemeSpec::EqualBins(k) => (None, Some(k)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
seed = 7
budgets = [50, 100]
replications = 20
metric = "squared"

[scenario]
kind = "threshold"
t = 0.5
rho_le = 0.05
rho_gt = 0.05

[[algorithms]]
kind = "srs"

[[algorithms]]
kind = "ws-ucb"
split = 0.4

[[algorithms]]
kind = "partibandits"
subroutine = "a2-threshold-het"
"#;

    #[test]
    fn parses_and_converts() {
        let config = ConfigFile::parse(SAMPLE).unwrap().into_experiment().unwrap();
        assert_eq!(config.seed, 7);
        assert_eq!(config.budgets, vec![50, 100]);
        assert_eq!(config.metric, ErrorMetric::Squared);
        assert_eq!(config.roster.len(), 3);
        assert_eq!(config.roster[1].name, "ws-ucb@0.4");
        config.validate().unwrap();
    }

    #[test]
    fn round_trips_through_toml() {
        let config = ConfigFile::parse(SAMPLE).unwrap().into_experiment().unwrap();
        let text = ConfigFile::from_experiment(&config).to_toml();
        let again = ConfigFile::parse(&text).unwrap().into_experiment().unwrap();
        assert_eq!(config, again);
    }

    #[test]
    fn unknown_fields_are_named() {
        let bad = SAMPLE.replace("replications = 20", "replications = 20\nbogus = 1");
        match ConfigFile::parse(&bad).unwrap_err() {
            SimError::Config { message, .. } => assert!(message.contains("bogus")),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn negative_rho_is_rejected_at_validation() {
        let bad = SAMPLE.replace("rho_le = 0.05", "rho_le = -0.05");
        let config = ConfigFile::parse(&bad).unwrap().into_experiment().unwrap();
        match config.validate().unwrap_err() {
            SimError::Config { field, .. } => assert_eq!(field, "scenario.rho_le"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn split_and_bins_conflict() {
        let bad = SAMPLE.replace("split = 0.4", "split = 0.4\nbins = 3");
        match ConfigFile::parse(&bad).unwrap().into_experiment().unwrap_err() {
            SimError::Config { field, .. } => assert_eq!(field, "algorithms[1]"),
            other => panic!("unexpected error {other}"),
        }
    }
}
