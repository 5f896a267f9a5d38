//! Command-line front end: run experiments from presets or TOML configs,
//! list and show presets, validate configs, and replay single replications.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use partibandits_sim::config::ConfigFile;
use partibandits_sim::harness::{self, ExperimentConfig, ResultTable};
use partibandits_sim::plot;
use partibandits_sim::presets::{all_presets, find_preset};
use partibandits_sim::SimError;

#[derive(Parser)]
#[command(
    name = "partibandits",
    version,
    about = "Budget-metered mean-estimation simulator: adaptive stratified samplers vs baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its CSV result table.
    Run(RunArgs),
    /// List built-in presets, or print one as a forkable TOML config.
    Presets {
        /// Print the full config of this preset.
        #[arg(long)]
        show: Option<String>,
    },
    /// Check a config (preset or file, with overrides applied) without
    /// running it.
    Validate(SelectArgs),
    /// Re-run one (algorithm, budget, replication) coordinate and dump its
    /// trace.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct SelectArgs {
    /// Built-in preset name (see `presets`).
    #[arg(long)]
    preset: Option<String>,
    /// TOML config path.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long, env = "PARTIBANDITS_SEED")]
    seed: Option<u64>,
    /// Budget grid override, comma-separated.
    #[arg(long, value_delimiter = ',')]
    budgets: Option<Vec<usize>>,
    /// Replication count override.
    #[arg(long)]
    reps: Option<usize>,
    /// Error metric override.
    #[arg(long, value_parser = ["squared", "absolute"])]
    metric: Option<String>,
    /// Worker thread override (0 = auto).
    #[arg(long)]
    parallelism: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    select: SelectArgs,
    /// Output CSV path.
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    /// Directory for SVG plots (optional).
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    #[command(flatten)]
    select: SelectArgs,
    /// Algorithm name as it appears in the result table (including any
    /// `[label]` suffix for multi-config presets).
    #[arg(long)]
    algo: String,
    /// Budget coordinate.
    #[arg(long)]
    budget: usize,
    /// Replication index.
    #[arg(long)]
    rep: usize,
}

struct Selection {
    title: String,
    configs: Vec<(String, ExperimentConfig)>,
}

fn load_selection(args: &SelectArgs) -> Result<Selection, SimError> {
    let mut selection = match (&args.preset, &args.config) {
        (Some(_), Some(_)) => {
            return Err(SimError::config(
                "preset/config",
                "give exactly one of --preset or --config",
            ));
        }
        (Some(name), None) => {
            let preset = find_preset(name).ok_or_else(|| {
                SimError::config(
                    "preset",
                    format!(
                        "unknown preset `{name}`; available: {}",
                        all_presets()
                            .iter()
                            .map(|p| p.name)
                            .collect::<Vec<_>>()
                            .join(", ")
                    ),
                )
            })?;
            Selection {
                title: preset.name.to_string(),
                configs: preset.configs,
            }
        }
        (None, Some(path)) => {
            let config = ConfigFile::load(path)?.into_experiment()?;
            let title = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "experiment".to_string());
            Selection {
                title,
                configs: vec![(String::new(), config)],
            }
        }
        (None, None) => {
            return Err(SimError::config(
                "preset/config",
                "give one of --preset or --config",
            ));
        }
    };
    for (_, config) in &mut selection.configs {
        if let Some(seed) = args.seed {
            config.seed = seed;
        }
        if let Some(budgets) = &args.budgets {
            config.budgets = budgets.clone();
        }
        if let Some(reps) = args.reps {
            config.replications = reps;
        }
        if let Some(metric) = &args.metric {
            config.metric = match metric.as_str() {
                "squared" => harness::ErrorMetric::Squared,
                _ => harness::ErrorMetric::Absolute,
            };
        }
        if let Some(parallelism) = args.parallelism {
            config.parallelism = parallelism;
        }
    }
    Ok(selection)
}

fn validate_all(selection: &Selection) -> Result<(), SimError> {
    for (label, config) in &selection.configs {
        let warnings = config.validate()?;
        for w in warnings {
            if label.is_empty() {
                eprintln!("warning: {w}");
            } else {
                eprintln!("warning [{label}]: {w}");
            }
        }
    }
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<(), SimError> {
    let selection = load_selection(&args.select)?;
    validate_all(&selection)?;
    let suffix_names = selection.configs.len() > 1;
    let mut merged: Option<ResultTable> = None;
    for (label, config) in &selection.configs {
        let table = harness::run_experiment(config)?;
        let suffix = if suffix_names && !label.is_empty() {
            Some(label.as_str())
        } else {
            None
        };
        match merged.as_mut() {
            None => {
                let mut t = ResultTable {
                    rows: Vec::new(),
                    metric: table.metric,
                    percentile: table.percentile,
                };
                t.merge(table, suffix);
                merged = Some(t);
            }
            Some(t) => t.merge(table, suffix),
        }
    }
    let table = merged.expect("at least one config");
    harness::emit_csv(&table, &args.out)?;
    println!("wrote {} rows to {}", table.rows.len(), args.out.display());
    if let Some(dir) = args.plot {
        std::fs::create_dir_all(&dir)?;
        let path = dir.join(format!("{}.svg", selection.title));
        plot::write_svg(&table, &selection.title, &path)?;
        println!("wrote plot {}", path.display());
    }
    Ok(())
}

fn cmd_presets(show: Option<String>) -> Result<(), SimError> {
    match show {
        None => {
            for preset in all_presets() {
                println!("{:<16} {}", preset.name, preset.summary);
            }
        }
        Some(name) => {
            let preset = find_preset(&name)
                .ok_or_else(|| SimError::config("preset", format!("unknown preset `{name}`")))?;
            println!("# preset: {} — {}", preset.name, preset.summary);
            for (label, config) in &preset.configs {
                if !label.is_empty() {
                    println!("\n# variant: {label}");
                }
                print!("{}", ConfigFile::from_experiment(config).to_toml());
            }
        }
    }
    Ok(())
}

fn cmd_validate(args: SelectArgs) -> Result<(), SimError> {
    let selection = load_selection(&args)?;
    validate_all(&selection)?;
    for (label, config) in &selection.configs {
        let tag = if label.is_empty() {
            String::new()
        } else {
            format!(" [{label}]")
        };
        println!(
            "ok{tag}: {} algorithms x {} budgets x {} replications, seed {}",
            config.roster.len(),
            config.budgets.len(),
            config.replications,
            config.seed
        );
    }
    Ok(())
}

fn cmd_replay(args: ReplayArgs) -> Result<(), SimError> {
    let selection = load_selection(&args.select)?;
    validate_all(&selection)?;
    // Multi-config presets suffix algorithm names with the variant label.
    let (config, plain_algo) = selection
        .configs
        .iter()
        .find_map(|(label, config)| {
            if label.is_empty() || selection.configs.len() == 1 {
                Some((config, args.algo.clone()))
            } else {
                let suffix = format!("[{label}]");
                args.algo
                    .strip_suffix(&suffix)
                    .map(|plain| (config, plain.to_string()))
            }
        })
        .ok_or_else(|| {
            SimError::config(
                "algo",
                format!("`{}` does not match any configured variant", args.algo),
            )
        })?;
    let report = harness::replay(config, &plain_algo, args.budget, args.rep)?;
    println!(
        "algorithm {} budget {} replication {}",
        report.algorithm, report.budget, report.replication
    );
    println!(
        "estimate {:.12} true mean {:.12} error {:.12}",
        report.estimate.value, report.true_mean, report.error
    );
    println!("labels spent {}", report.estimate.labels_spent);
    for group in &report.estimate.per_group {
        println!(
            "  group {}: n = {}, weighted mean = {:.12}",
            group.group, group.n, group.weighted_mean
        );
    }
    for (phase, trace) in &report.traces {
        println!("trace `{phase}` ({} rounds):", trace.len());
        println!("  round group point label");
        for row in trace.rows() {
            println!(
                "  {:>5} {:>5} {:>5} {}",
                row.round, row.group, row.point, row.label
            );
        }
        if !trace.scores.is_empty() {
            println!("  per-round selection scores:");
            for (round, scores) in trace.scores.iter().enumerate() {
                let rendered: Vec<String> = scores.iter().map(|s| format!("{s:.6}")).collect();
                println!("  {:>5} [{}]", round, rendered.join(", "));
            }
        }
    }
    Ok(())
}

fn exit_code(err: &SimError) -> u8 {
    match err {
        SimError::Config { .. } | SimError::CsvParse { .. } => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Presets { show } => cmd_presets(show),
        Command::Validate(args) => cmd_validate(args),
        Command::Replay(args) => cmd_replay(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
