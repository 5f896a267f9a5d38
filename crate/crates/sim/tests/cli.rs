//! End-to-end checks of the `partibandits` binary: exit codes, override
//! composition, determinism of emitted files, and the CSV scenario.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_partibandits"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .env_remove("PARTIBANDITS_SEED")
        .output()
        .expect("binary runs")
}

#[test]
fn presets_list_and_show() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["presets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["fig1-left", "fig1-right", "thompson-binned", "csv-tails"] {
        assert!(text.contains(name), "missing {name} in listing");
    }

    let out = run_in(dir.path(), &["presets", "--show", "fig1-right"]);
    assert!(out.status.success());
    let shown = String::from_utf8(out.stdout).unwrap();
    assert!(shown.contains("kind = \"threshold\""));
    assert!(shown.contains("budgets = ["));
}

#[test]
fn run_writes_deterministic_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "run",
        "--preset",
        "fig1-right",
        "--reps",
        "10",
        "--budgets",
        "50,100",
        "--out",
        "a.csv",
        "--plot",
        "plots",
    ];
    assert!(run_in(dir.path(), &args).status.success());
    let mut args2 = args;
    args2[8] = "b.csv";
    assert!(run_in(dir.path(), &args2).status.success());
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    let b = fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b, "re-running the same config must be byte-identical");
    let text = String::from_utf8(a).unwrap();
    // |roster| x |budgets| data rows after the comment and header lines.
    assert_eq!(text.lines().count(), 2 + 4 * 2);
    assert!(text.lines().nth(1).unwrap().starts_with("algorithm,budget,"));
    assert!(dir.path().join("plots/fig1-right.svg").exists());
}

#[test]
fn seed_override_and_env_default_compose() {
    let dir = tempfile::tempdir().unwrap();
    let base = [
        "run", "--preset", "fig1-right", "--reps", "5", "--budgets", "50",
    ];
    let flag = run_in(dir.path(), &[&base[..], &["--seed", "99", "--out", "flag.csv"]].concat());
    assert!(flag.status.success());
    let env = bin()
        .current_dir(dir.path())
        .args([&base[..], &["--out", "env.csv"]].concat())
        .env("PARTIBANDITS_SEED", "99")
        .output()
        .unwrap();
    assert!(env.status.success());
    assert_eq!(
        fs::read(dir.path().join("flag.csv")).unwrap(),
        fs::read(dir.path().join("env.csv")).unwrap(),
        "--seed and PARTIBANDITS_SEED must compose identically"
    );
    let default = run_in(dir.path(), &[&base[..], &["--out", "default.csv"]].concat());
    assert!(default.status.success());
    assert_ne!(
        fs::read(dir.path().join("flag.csv")).unwrap(),
        fs::read(dir.path().join("default.csv")).unwrap()
    );
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_in(dir.path(), &["validate", "--preset", "fig1-left"])
        .status
        .success());

    // Config error: nonzero exit 2 naming the field.
    let bad = dir.path().join("bad.toml");
    fs::write(
        &bad,
        r#"
budgets = [50]
replications = 5
[scenario]
kind = "threshold"
t = 0.5
rho_le = -0.2
rho_gt = 0.0
[[algorithms]]
kind = "srs"
"#,
    )
    .unwrap();
    let out = run_in(dir.path(), &["validate", "--config", "bad.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("rho_le"), "stderr must name the field: {err}");

    // Unknown preset is also a config error.
    let out = run_in(dir.path(), &["validate", "--preset", "nope"]);
    assert_eq!(out.status.code(), Some(2));

    // A config pointing at a missing pool file is still a config problem.
    let out = run_in(
        dir.path(),
        &["run", "--preset", "csv-tails", "--reps", "5", "--out", "x.csv"],
    );
    assert_eq!(out.status.code(), Some(2));

    // Replication failure mid-run: exit 3 with the failing coordinates.
    fs::write(dir.path().join("pool.csv"), "x,y\n0.1,0\n0.6,1\n0.9,1\n").unwrap();
    let out = run_in(
        dir.path(),
        &[
            "run", "--preset", "csv-tails", "--reps", "5", "--budgets", "80", "--out", "x.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(
        err.contains("budget 80") && err.contains("replication"),
        "stderr must carry replay coordinates: {err}"
    );
}

#[test]
fn replay_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "replay",
        "--preset",
        "fig1-right",
        "--algo",
        "ws-ucb@0.4",
        "--budget",
        "50",
        "--rep",
        "7",
    ];
    let a = run_in(dir.path(), &args);
    let b = run_in(dir.path(), &args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("trace `ws-ucb` (50 rounds)"));
    assert!(text.contains("per-round selection scores"));
}

#[test]
fn csv_scenario_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    // A pool whose tails are strongly label-separated.
    let mut rows = String::from("score,label\n");
    for i in 0..4000 {
        let x = i as f64 / 4000.0;
        let y = u8::from(x >= 0.5);
        rows.push_str(&format!("{x},{y}\n"));
    }
    fs::write(dir.path().join("pool.csv"), rows).unwrap();
    let config = r#"
seed = 5
budgets = [40, 80]
replications = 16
metric = "squared"
[scenario]
kind = "csv"
path = "pool.csv"
x_column = "score"
y_column = "label"
tail_quantile = 0.05
[[algorithms]]
kind = "srs"
[[algorithms]]
kind = "partibandits"
"#;
    fs::write(dir.path().join("tails.toml"), config).unwrap();
    let out = run_in(
        dir.path(),
        &["run", "--config", "tails.toml", "--out", "tails.csv"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("tails.csv")).unwrap();
    assert_eq!(table.lines().count(), 2 + 2 * 2);
    // Tail pool is noiseless by construction: both tails are constant, so
    // partibandits should be essentially exact at budget 80.
    let pb_row = table
        .lines()
        .find(|l| l.starts_with("partibandits,80"))
        .unwrap();
    let err: f64 = pb_row.split(',').nth(2).unwrap().parse().unwrap();
    assert!(err < 0.01, "partibandits error on separable tails: {err}");
}
