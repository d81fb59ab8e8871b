//! The benchmark matrix: (tree × workload) cells, each pre-populated,
//! warmed up, and measured over a deterministic operation stream.

use std::time::Instant;

use gsat_workloads::{Distribution, Mix, Op, Rng64, Workload, WorkloadSpec};
use serde::{Deserialize, Serialize};

use crate::trees::{make_tree, BenchTree, TreeParams};
use crate::BenchError;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchConfig {
    pub trees: Vec<String>,
    /// Workload distributions in grammar form: `uniform | xy:X/Y | zipf:S`.
    pub workloads: Vec<String>,
    pub keys: u64,
    pub ops: u64,
    /// Wall-clock measurement window; replaces `ops` as the stop rule and
    /// makes throughput non-deterministic (informational mode).
    #[serde(default)]
    pub duration_secs: Option<f64>,
    #[serde(default = "default_reps")]
    pub reps: u32,
    /// Warmup operations as a multiple of the key-universe size.
    #[serde(default = "default_warmup")]
    pub warmup_factor: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub lazy_delete: bool,
    #[serde(default = "default_mix")]
    pub mix: String,
    #[serde(default = "default_baseline")]
    pub baseline: String,
    #[serde(default)]
    pub params: TreeParams,
}

fn default_reps() -> u32 {
    5
}

fn default_warmup() -> u64 {
    10
}

fn default_mix() -> String {
    "read-only".into()
}

fn default_baseline() -> String {
    "splay".into()
}

/// One (tree, workload) cell of the result table, averaged over reps.
#[derive(Clone, Debug, Serialize)]
pub struct CellResult {
    pub tree: String,
    pub workload: String,
    pub mix: String,
    pub keys: u64,
    pub ops_per_sec: f64,
    pub relative: f64,
    pub depth_mean: f64,
    pub nodes_per_op: f64,
    pub rebuilds: f64,
    /// Whether the access density is bounded on its support.
    pub smooth: bool,
}

struct CellAccum {
    ops_per_sec: f64,
    depth_mean: f64,
    nodes_per_op: f64,
    rebuilds: f64,
}

pub fn run_matrix(config: &BenchConfig) -> Result<Vec<CellResult>, BenchError> {
    if config.reps == 0 {
        return Err(BenchError::Config("reps must be at least 1".into()));
    }
    for name in &config.trees {
        if !crate::trees::TREE_NAMES.contains(&name.as_str()) {
            return Err(BenchError::UnknownTree(name.clone()));
        }
    }
    if !config.trees.contains(&config.baseline) {
        return Err(BenchError::Config(format!(
            "baseline tree '{}' is not among the benchmarked trees",
            config.baseline
        )));
    }
    let mix: Mix = config.mix.parse().map_err(BenchError::Config)?;
    let mut distributions = Vec::new();
    for w in &config.workloads {
        let d: Distribution = w.parse().map_err(BenchError::Config)?;
        distributions.push(d);
    }

    let mut results = Vec::new();
    for (widx, distribution) in distributions.iter().enumerate() {
        for tree_name in &config.trees {
            let mut acc = CellAccum {
                ops_per_sec: 0.0,
                depth_mean: 0.0,
                nodes_per_op: 0.0,
                rebuilds: 0.0,
            };
            for rep in 0..config.reps {
                let cell = run_cell(config, tree_name, *distribution, mix, widx, rep)?;
                acc.ops_per_sec += cell.ops_per_sec;
                acc.depth_mean += cell.depth_mean;
                acc.nodes_per_op += cell.nodes_per_op;
                acc.rebuilds += cell.rebuilds;
            }
            let reps = config.reps as f64;
            let spec_note = WorkloadSpec {
                universe: config.keys,
                distribution: *distribution,
                mix,
                delete_mode: Default::default(),
                ops: 0,
                seed: 0,
            };
            results.push(CellResult {
                tree: tree_name.clone(),
                workload: distribution.to_string(),
                mix: mix.to_string(),
                keys: config.keys,
                ops_per_sec: acc.ops_per_sec / reps,
                relative: 0.0,
                depth_mean: acc.depth_mean / reps,
                nodes_per_op: acc.nodes_per_op / reps,
                rebuilds: acc.rebuilds / reps,
                smooth: spec_note.smoothness_note(),
            });
        }
    }

    // Relative column against the baseline row of the same workload.
    for distribution in &distributions {
        let workload = distribution.to_string();
        let base = results
            .iter()
            .find(|r| r.workload == workload && r.tree == config.baseline)
            .map(|r| r.ops_per_sec)
            .expect("baseline row exists");
        for r in results.iter_mut().filter(|r| r.workload == workload) {
            r.relative = r.ops_per_sec / base;
        }
    }
    Ok(results)
}

fn cell_seed(master: u64, widx: usize, rep: u32, lane: u64) -> u64 {
    let mut rng =
        Rng64::new(master ^ ((widx as u64 + 1) << 40) ^ ((u64::from(rep) + 1) << 20) ^ lane);
    rng.next_u64()
}

fn run_cell(
    config: &BenchConfig,
    tree_name: &str,
    distribution: Distribution,
    mix: Mix,
    widx: usize,
    rep: u32,
) -> Result<CellAccum, BenchError> {
    let mut tree = make_tree(tree_name, &config.params, config.keys, config.lazy_delete)?;

    // Pre-populate the whole universe in permuted order, one access each.
    let seed = cell_seed(config.seed, widx, rep, 0);
    let spec = WorkloadSpec {
        universe: config.keys,
        distribution,
        mix,
        delete_mode: Default::default(),
        ops: config.ops,
        seed,
    };
    let workload = Workload::new(spec.clone()).map_err(BenchError::Workload)?;
    for &key in workload.universe_keys() {
        tree.insert(key, key);
    }

    // Warmup: a multiple of the universe size, from its own stream.
    let warmup_ops = config.warmup_factor * config.keys;
    if warmup_ops > 0 {
        let warm_spec = WorkloadSpec {
            ops: warmup_ops,
            seed: cell_seed(config.seed, widx, rep, 1),
            ..spec.clone()
        };
        for op in Workload::new(warm_spec).map_err(BenchError::Workload)? {
            apply(tree.as_mut(), op);
        }
    }

    tree.reset_work();
    let mut measured_ops = 0u64;
    let started = Instant::now();
    match config.duration_secs {
        None => {
            for op in workload {
                apply(tree.as_mut(), op);
            }
            measured_ops = config.ops;
        }
        Some(window) => {
            // Keep replaying fresh streams until the window closes.
            let mut round = 0u64;
            while started.elapsed().as_secs_f64() < window {
                let chunk_spec = WorkloadSpec {
                    ops: config.keys.max(10_000),
                    seed: cell_seed(config.seed, widx, rep, 2 + round),
                    ..spec.clone()
                };
                for op in Workload::new(chunk_spec).map_err(BenchError::Workload)? {
                    apply(tree.as_mut(), op);
                    measured_ops += 1;
                }
                round += 1;
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64().max(1e-9);
    let work = tree.work();
    let ops = measured_ops.max(1) as f64;
    Ok(CellAccum {
        ops_per_sec: measured_ops as f64 / elapsed,
        depth_mean: (work.visits as f64 / ops - 1.0).max(0.0),
        nodes_per_op: work.total() as f64 / ops,
        rebuilds: work.rebuilds as f64,
    })
}

fn apply(tree: &mut dyn BenchTree, op: Op) {
    match op {
        Op::Get(k) => {
            tree.get(k);
        }
        Op::Insert(k, v) => tree.insert(k, v),
        Op::Delete(k) => tree.delete(k),
    }
}
