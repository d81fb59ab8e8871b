//! Operation-count instrumentation. All counters are timing-free, so a
//! fixed seed reproduces them exactly.

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    /// Nodes entered while routing operations (rebuild work excluded).
    pub node_visits: u64,
    /// Nodes entered while collecting range results.
    pub collect_visits: u64,
    /// Subtree rebuilds performed.
    pub rebuilds: u64,
    /// Keys processed across all rebuilds (flatten + rebuild cost proxy).
    pub rebuild_keys: u64,
    /// Nodes allocated by rebuilds.
    pub rebuild_nodes: u64,
    /// Accesses belonging to tombstoned keys that standard-mode rebuilds
    /// discarded.
    pub dropped_accesses: u64,
}

impl Stats {
    /// Total structural work: traversal plus rebuild effort.
    pub fn total_work(&self) -> u64 {
        self.node_visits + self.collect_visits + self.rebuild_keys + self.rebuild_nodes
    }

    pub fn reset(&mut self) {
        *self = Stats::default();
    }
}
