//! Determinism and budget-accounting contracts that every sampler shares.

use std::collections::HashSet;

use partibandits_core::baselines::{run_srs, run_thompson_binned, ThompsonConfig};
use partibandits_core::dgp::gen_threshold_pool;
use partibandits_core::partibandits::{run_partibandits, PartiBanditsConfig};
use partibandits_core::seeding;
use partibandits_core::ucb::{run_warmstart_ucb, WsUcbParams};
use partibandits_core::{LabelOracle, SamplerTrace, StratificationScheme};

fn assert_no_duplicate_reveals(trace: &SamplerTrace) {
    let mut seen = HashSet::new();
    for row in trace.rows() {
        assert!(seen.insert(row.point), "point {} revealed twice", row.point);
    }
}

#[test]
fn ws_ucb_traces_are_bit_identical_across_runs() {
    let (pool, _) = gen_threshold_pool(0.5, 0.05, 0.05, 5_000, 99).unwrap();
    let scheme = StratificationScheme::split_at(0.5, 0.5).unwrap();
    let run = |seed: u64| {
        let mut oracle = LabelOracle::new(&pool, 120);
        let mut rng = seeding::rng_from_seed(seed);
        run_warmstart_ucb(&mut oracle, &scheme, WsUcbParams::new(120, 1), &mut rng).unwrap()
    };
    let (est_a, trace_a) = run(4242);
    let (est_b, trace_b) = run(4242);
    assert_eq!(trace_a, trace_b);
    assert_eq!(est_a, est_b);
    let (_, trace_c) = run(4243);
    assert_ne!(trace_a.rows, trace_c.rows);
    assert_no_duplicate_reveals(&trace_a);
}

#[test]
fn partibandits_full_trace_is_deterministic() {
    let (pool, _) = gen_threshold_pool(0.5, 0.05, 0.05, 5_000, 7).unwrap();
    let config = PartiBanditsConfig::new("a2-threshold", 80);
    let run = |seed: u64| {
        let mut oracle = LabelOracle::new(&pool, 80);
        let mut rng = seeding::rng_from_seed(seed);
        run_partibandits(&mut oracle, &config, &mut rng).unwrap()
    };
    let a = run(11);
    let b = run(11);
    assert_eq!(a.stage1.trace, b.stage1.trace);
    assert_eq!(a.stage2_trace, b.stage2_trace);
    assert_eq!(a.estimate, b.estimate);

    // Stage-1 and stage-2 reveals never overlap (fresh draws only).
    let stage1_points: HashSet<usize> = a.stage1.trace.rows().iter().map(|r| r.point).collect();
    for row in a.stage2_trace.rows() {
        assert!(!stage1_points.contains(&row.point));
    }
    assert_no_duplicate_reveals(&a.stage2_trace);
}

#[test]
fn oracle_spent_matches_distinct_reveals() {
    let (pool, _) = gen_threshold_pool(0.5, 0.1, 0.1, 2_000, 3).unwrap();
    let mut oracle = LabelOracle::new(&pool, 60);
    let mut rng = seeding::rng_from_seed(17);
    let (est, trace) = run_srs(&mut oracle, 60, &mut rng).unwrap();
    assert_eq!(oracle.spent(), 60);
    assert_eq!(est.labels_spent, 60);
    let distinct: HashSet<usize> = trace.rows().iter().map(|r| r.point).collect();
    assert_eq!(distinct.len(), 60);
}

#[test]
fn thompson_binned_trace_is_deterministic() {
    let (pool, _) = gen_threshold_pool(0.5, 0.05, 0.05, 5_000, 5).unwrap();
    let scheme = StratificationScheme::equal_bins(0.0, 1.0, 5).unwrap();
    let run = |seed: u64| {
        let mut oracle = LabelOracle::new(&pool, 200);
        let mut rng = seeding::rng_from_seed(seed);
        run_thompson_binned(&mut oracle, &scheme, &ThompsonConfig::default(), 200, &mut rng)
            .unwrap()
    };
    let (est_a, trace_a) = run(33);
    let (est_b, trace_b) = run(33);
    assert_eq!(trace_a, trace_b);
    assert_eq!(est_a.value, est_b.value);
    assert_no_duplicate_reveals(&trace_a);
}
