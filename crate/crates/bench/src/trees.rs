//! Uniform facade over every benchmarkable tree, plus the name registry
//! the CLI exposes.

use gsat::baselines::{ClassicBTree, SplayTree};
use gsat::{DegreePolicy, DeleteMode, Gsat, Key};

use crate::BenchError;

/// Timing-free work counters, comparable across structures.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WorkSnapshot {
    /// Nodes entered while routing operations.
    pub visits: u64,
    /// Subtree rebuilds (zero for the classic baselines).
    pub rebuilds: u64,
    /// Keys plus nodes processed by rebuilds.
    pub rebuild_work: u64,
}

impl WorkSnapshot {
    pub fn total(&self) -> u64 {
        self.visits + self.rebuild_work
    }
}

pub trait BenchTree {
    fn get(&mut self, key: Key) -> Option<i64>;
    fn insert(&mut self, key: Key, value: i64);
    fn delete(&mut self, key: Key);
    fn work(&self) -> WorkSnapshot;
    fn reset_work(&mut self);
}

impl BenchTree for Gsat<i64> {
    fn get(&mut self, key: Key) -> Option<i64> {
        Gsat::get(self, key)
    }

    fn insert(&mut self, key: Key, value: i64) {
        Gsat::insert(self, key, value);
    }

    fn delete(&mut self, key: Key) {
        Gsat::delete(self, key);
    }

    fn work(&self) -> WorkSnapshot {
        let s = self.stats();
        WorkSnapshot {
            visits: s.node_visits,
            rebuilds: s.rebuilds,
            rebuild_work: s.rebuild_keys + s.rebuild_nodes,
        }
    }

    fn reset_work(&mut self) {
        self.reset_stats();
    }
}

impl BenchTree for ClassicBTree<i64> {
    fn get(&mut self, key: Key) -> Option<i64> {
        ClassicBTree::get(self, key)
    }

    fn insert(&mut self, key: Key, value: i64) {
        ClassicBTree::insert(self, key, value);
    }

    fn delete(&mut self, key: Key) {
        ClassicBTree::delete(self, key);
    }

    fn work(&self) -> WorkSnapshot {
        WorkSnapshot {
            visits: self.node_visits(),
            ..WorkSnapshot::default()
        }
    }

    fn reset_work(&mut self) {
        self.reset_visits();
    }
}

impl BenchTree for SplayTree<i64> {
    fn get(&mut self, key: Key) -> Option<i64> {
        SplayTree::get(self, key)
    }

    fn insert(&mut self, key: Key, value: i64) {
        SplayTree::insert(self, key, value);
    }

    fn delete(&mut self, key: Key) {
        SplayTree::delete(self, key);
    }

    fn work(&self) -> WorkSnapshot {
        WorkSnapshot {
            visits: self.node_visits(),
            ..WorkSnapshot::default()
        }
    }

    fn reset_work(&mut self) {
        self.reset_visits();
    }
}

/// Tunables shared by the self-adjusting policies and the baselines.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct TreeParams {
    /// Interpolation exponent for sait / ist-baseline.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Branching constant for sabt.
    #[serde(default = "default_sabt_b")]
    pub sabt_b: u32,
    /// Occupancy constant for btree and lazy-btree-baseline.
    #[serde(default = "default_btree_b")]
    pub btree_b: u32,
}

fn default_alpha() -> f64 {
    0.5
}

fn default_sabt_b() -> u32 {
    16
}

fn default_btree_b() -> u32 {
    8
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            alpha: default_alpha(),
            sabt_b: default_sabt_b(),
            btree_b: default_btree_b(),
        }
    }
}

pub const TREE_NAMES: &[&str] = &[
    "sait",
    "sabt",
    "salt",
    "sa2t",
    "ist-baseline",
    "lazy-btree-baseline",
    "btree",
    "splay",
];

pub fn make_tree(
    name: &str,
    params: &TreeParams,
    universe: u64,
    lazy_delete: bool,
) -> Result<Box<dyn BenchTree>, BenchError> {
    let policy = match name {
        "sait" => Some(DegreePolicy::sait(params.alpha)),
        "sabt" => Some(DegreePolicy::sabt(params.sabt_b)),
        "salt" => Some(DegreePolicy::salt()),
        "sa2t" => Some(DegreePolicy::sa2t()),
        "ist-baseline" => Some(DegreePolicy::ist_baseline(params.alpha)),
        "lazy-btree-baseline" => Some(DegreePolicy::lazy_btree_baseline(params.btree_b)),
        _ => None,
    };
    if let Some(policy) = policy {
        let mut tree = Gsat::with_bounds(policy, 0, universe as Key);
        if lazy_delete {
            tree.set_delete_mode(DeleteMode::LazyDelete);
        }
        return Ok(Box::new(tree));
    }
    match name {
        "btree" => Ok(Box::new(ClassicBTree::<i64>::new(params.btree_b as usize))),
        "splay" => Ok(Box::new(SplayTree::<i64>::new())),
        other => Err(BenchError::UnknownTree(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_covers_every_name() {
        for name in TREE_NAMES {
            make_tree(name, &TreeParams::default(), 100, false).unwrap();
        }
        assert!(matches!(
            make_tree("rope", &TreeParams::default(), 100, false),
            Err(BenchError::UnknownTree(_))
        ));
    }

    #[test]
    fn facade_semantics_match_across_trees() {
        for name in TREE_NAMES {
            let mut t = make_tree(name, &TreeParams::default(), 100, false).unwrap();
            assert_eq!(t.get(5), None);
            t.insert(5, 50);
            t.insert(5, 51);
            assert_eq!(t.get(5), Some(50), "{name}: first value wins");
            t.delete(5);
            assert_eq!(t.get(5), None, "{name}");
            assert!(t.work().visits > 0, "{name} must count visits");
        }
    }
}
