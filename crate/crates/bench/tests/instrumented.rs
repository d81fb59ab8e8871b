//! Instrumented-mode sanity: the adaptive tree's mean search depth falls
//! as the access distribution gets more skewed.

use gsat_bench::{run_matrix, BenchConfig, TreeParams};

#[test]
fn sait_mean_depth_shrinks_under_skew() {
    let config = BenchConfig {
        trees: vec!["splay".into(), "sait".into()],
        workloads: vec!["uniform".into(), "xy:99/01".into()],
        keys: 20_000,
        ops: 100_000,
        duration_secs: None,
        reps: 1,
        warmup_factor: 5,
        seed: 42,
        lazy_delete: false,
        mix: "read-only".into(),
        baseline: "splay".into(),
        params: TreeParams::default(),
    };
    let results = run_matrix(&config).unwrap();
    let depth = |workload: &str| {
        results
            .iter()
            .find(|r| r.tree == "sait" && r.workload == workload)
            .unwrap()
            .depth_mean
    };
    assert!(
        depth("xy:99/01") < depth("uniform"),
        "skewed {} vs uniform {}",
        depth("xy:99/01"),
        depth("uniform")
    );
}

#[test]
fn duration_mode_runs_and_reports() {
    let config = BenchConfig {
        trees: vec!["splay".into()],
        workloads: vec!["uniform".into()],
        keys: 1_000,
        ops: 0,
        duration_secs: Some(0.05),
        reps: 1,
        warmup_factor: 0,
        seed: 1,
        lazy_delete: false,
        mix: "read-only".into(),
        baseline: "splay".into(),
        params: TreeParams::default(),
    };
    let results = run_matrix(&config).unwrap();
    assert!(results[0].ops_per_sec > 0.0);
    assert_eq!(results[0].relative, 1.0);
}
