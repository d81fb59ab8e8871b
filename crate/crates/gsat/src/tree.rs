//! The self-adjusting tree: point operations with access counting and
//! counter-driven lazy rebuilding.
//!
//! Every operation walks one root-to-target path, bumping a per-node
//! operation counter on the way. The shallowest node whose counter exceeds
//! a quarter of the accesses recorded at its last rebuild has its whole
//! subtree rebuilt into ideal shape once the operation's search completes.
//! Deletes are tombstones: the key stays physically present (and keeps
//! absorbing accesses) until a rebuild drops it — or forever, in
//! lazy-delete mode.

use crate::build::{build_tree, validate_records, BuildError, RawNode};
use crate::node::{Entry, KeyRecord, Node, NodeView, Slot};
use crate::policy::{DegreePolicy, DeleteMode, Key};
use crate::search::SlotRef;
use crate::stats::Stats;

pub struct Gsat<V> {
    root: Slot<V>,
    policy: DegreePolicy,
    delete_mode: DeleteMode,
    lower: Key,
    upper: Key,
    explicit_bounds: bool,
    stats: Stats,
}

struct OpCtx {
    /// Depth of the shallowest overflowing node seen by this operation.
    claimed: Option<usize>,
    /// Whether a root rebuild may tighten the bounds to the content range.
    tighten_root: bool,
}

struct PointOut<V> {
    result: Option<V>,
    /// Change in subtree weight to propagate to ancestors (access landed,
    /// minus anything a rebuild discarded).
    weight_delta: i64,
    live_delta: i64,
}

impl<V: Clone> Gsat<V> {
    /// Empty tree over the whole key line.
    pub fn new(policy: DegreePolicy) -> Self {
        Gsat {
            root: None,
            policy,
            delete_mode: DeleteMode::Standard,
            lower: Key::MIN,
            upper: Key::MAX,
            explicit_bounds: false,
            stats: Stats::default(),
        }
    }

    /// Empty tree over `[lower, upper)`. Keys outside the interval are
    /// still accepted by point operations; rebuilds widen the affected
    /// subtree bounds to cover them.
    pub fn with_bounds(policy: DegreePolicy, lower: Key, upper: Key) -> Self {
        assert!(lower < upper, "invalid bounds [{lower}, {upper})");
        Gsat {
            root: None,
            policy,
            delete_mode: DeleteMode::Standard,
            lower,
            upper,
            explicit_bounds: true,
            stats: Stats::default(),
        }
    }

    /// Ideal tree over pre-accessed records: strictly increasing keys in
    /// `[lower, upper)`, every access count at least 1. In the resulting
    /// tree each child subtree holds at most m/(D(m)+1) of its parent's
    /// accesses, counters are zeroed, and an in-order walk reproduces the
    /// input exactly.
    pub fn from_records(
        records: Vec<KeyRecord<V>>,
        lower: Key,
        upper: Key,
        policy: DegreePolicy,
    ) -> Result<Self, BuildError> {
        let entries: Vec<Entry<V>> = records
            .into_iter()
            .map(|r| Entry {
                key: r.key,
                value: r.value,
                accesses: r.accesses,
                marked: false,
            })
            .collect();
        validate_records(&entries, lower, upper)?;
        let mut nodes_built = 0;
        let root = build_tree(
            entries,
            lower,
            upper,
            &policy,
            &mut nodes_built,
            &mut assemble,
        );
        Ok(Gsat {
            root,
            policy,
            delete_mode: DeleteMode::Standard,
            lower,
            upper,
            explicit_bounds: true,
            stats: Stats::default(),
        })
    }

    pub fn set_delete_mode(&mut self, mode: DeleteMode) {
        self.delete_mode = mode;
    }

    pub fn delete_mode(&self) -> DeleteMode {
        self.delete_mode
    }

    pub fn policy(&self) -> &DegreePolicy {
        &self.policy
    }

    /// Looks the key up, counting the access. Returns the value only if the
    /// key is present and not tombstoned.
    pub fn get(&mut self, key: Key) -> Option<V> {
        let mut ctx = self.ctx();
        let out = get_rec(
            &mut self.root,
            key,
            0,
            &self.policy,
            self.delete_mode,
            &mut self.stats,
            &mut ctx,
        );
        out.result
    }

    /// Adds the pair if the key is absent (or tombstoned, which revives it
    /// and overwrites the value). An insert over a live key only counts as
    /// an access; the stored value is kept.
    pub fn insert(&mut self, key: Key, value: V) {
        assert!(key < Key::MAX, "key i64::MAX is reserved");
        let mut ctx = self.ctx();
        insert_rec(
            &mut self.root,
            key,
            value,
            self.lower,
            self.upper,
            0,
            &self.policy,
            self.delete_mode,
            &mut self.stats,
            &mut ctx,
        );
    }

    /// Tombstones the key if it is live. Counts as an access either way.
    pub fn delete(&mut self, key: Key) {
        let mut ctx = self.ctx();
        delete_rec(
            &mut self.root,
            key,
            0,
            &self.policy,
            self.delete_mode,
            &mut self.stats,
            &mut ctx,
        );
    }

    /// Number of live (non-tombstoned) keys.
    pub fn len(&self) -> usize {
        self.root.as_ref().map_or(0, |n| n.live as usize)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Total accesses recorded in the tree (tombstoned keys included).
    pub fn total_accesses(&self) -> u64 {
        self.root.as_ref().map_or(0, |n| n.accesses)
    }

    /// Longest root-to-node path, in edges. Empty and single-node trees
    /// both report 0.
    pub fn depth(&self) -> usize {
        self.root.as_ref().map_or(0, |n| n.height as usize)
    }

    pub fn node_count(&self) -> usize {
        fn walk<V>(node: &Node<V>) -> usize {
            1 + node
                .children
                .iter()
                .flatten()
                .map(|c| walk(c))
                .sum::<usize>()
        }
        self.root.as_deref().map_or(0, walk)
    }

    /// Depth of the node holding `key` (root = 0), if the key is
    /// physically present — tombstoned keys are still found. Does not
    /// count as an access.
    pub fn depth_of(&self, key: Key) -> Option<usize> {
        let mut node = self.root.as_deref()?;
        let mut depth = 0;
        loop {
            match node.slot_for(key, &self.policy) {
                SlotRef::Key(_) => return Some(depth),
                SlotRef::Child(i) => {
                    node = node.children[i].as_deref()?;
                    depth += 1;
                }
            }
        }
    }

    /// In-order records; tombstoned keys included only when asked for.
    pub fn flatten(&self, include_marked: bool) -> Vec<KeyRecord<V>> {
        let mut out = Vec::new();
        if let Some(node) = &self.root {
            node.collect_records(include_marked, &mut out);
        }
        out
    }

    /// Rebuilds the whole tree immediately.
    pub fn force_rebuild(&mut self) {
        let tighten = !self.explicit_bounds;
        rebuild_slot(
            &mut self.root,
            &self.policy,
            self.delete_mode,
            &mut self.stats,
            tighten,
        );
    }

    /// Whether every node's children each hold at most m/(D(m)+1) of its
    /// accesses, recursively, and no node exceeds its allowed width.
    pub fn check_ideal(&self) -> bool {
        fn check<V>(node: &Node<V>, policy: &DegreePolicy) -> bool {
            let degree = policy.degree.degree(node.accesses).max(1);
            if node.keys.len() as u64 > degree {
                return false;
            }
            node.children
                .iter()
                .flatten()
                .all(|child| child.accesses * (degree + 1) <= node.accesses && check(child, policy))
        }
        self.root.as_ref().is_none_or(|n| check(n, &self.policy))
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    pub fn reset_stats(&mut self) {
        self.stats.reset();
    }

    pub fn view(&self) -> Option<NodeView<'_, V>> {
        self.root.as_deref().map(|node| NodeView { node })
    }

    /// Full structural audit; used by tests and the differential suites.
    pub fn check_invariants(&self) -> Result<(), String> {
        let Some(root) = self.root.as_deref() else {
            return Ok(());
        };
        let mut prev = None;
        audit_node(root, &mut prev)
    }

    fn ctx(&self) -> OpCtx {
        OpCtx {
            claimed: None,
            tighten_root: !self.explicit_bounds,
        }
    }
}

fn assemble<V>(raw: RawNode<V, Node<V>>) -> Box<Node<V>> {
    Box::new(Node {
        keys: raw.keys,
        values: raw.values,
        key_accesses: raw.key_accesses,
        marked: raw.marked,
        children: raw.children,
        accesses: raw.accesses,
        accesses_at_rebuild: raw.accesses,
        counter: 0,
        live: raw.live,
        lower: raw.lower,
        upper: raw.upper,
        height: raw.height,
        interp: raw.interp,
    })
}

/// Counter bump plus overflow claim. Size-weighted trees only count
/// structural operations, so lookups pass `structural = false` and leave
/// the rebuild machinery untouched.
#[inline]
fn touch<V>(node: &mut Node<V>, depth: usize, ctx: &mut OpCtx, counts: bool) {
    if counts {
        node.counter += 1;
        if ctx.claimed.is_none() && node.counter * 4 > node.accesses_at_rebuild {
            ctx.claimed = Some(depth);
        }
    }
}

fn get_rec<V: Clone>(
    slot: &mut Slot<V>,
    key: Key,
    depth: usize,
    policy: &DegreePolicy,
    mode: DeleteMode,
    stats: &mut Stats,
    ctx: &mut OpCtx,
) -> PointOut<V> {
    let Some(node) = slot.as_deref_mut() else {
        return PointOut {
            result: None,
            weight_delta: 0,
            live_delta: 0,
        };
    };
    stats.node_visits += 1;
    let counts = policy.counts_accesses();
    touch(node, depth, ctx, counts);
    let mut out = match node.slot_for(key, policy) {
        SlotRef::Key(i) => {
            if counts {
                node.key_accesses[i] += 1;
                node.accesses += 1;
            }
            PointOut {
                result: (!node.marked[i]).then(|| node.values[i].clone()),
                weight_delta: i64::from(counts),
                live_delta: 0,
            }
        }
        SlotRef::Child(i) => {
            let old_h = Node::child_height(&node.children[i]);
            let o = get_rec(
                &mut node.children[i],
                key,
                depth + 1,
                policy,
                mode,
                stats,
                ctx,
            );
            apply_deltas(node, &o, i, old_h);
            o
        }
    };
    if ctx.claimed == Some(depth) {
        out.weight_delta += rebuild_slot(slot, policy, mode, stats, depth == 0 && ctx.tighten_root);
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn insert_rec<V: Clone>(
    slot: &mut Slot<V>,
    key: Key,
    value: V,
    lower: Key,
    upper: Key,
    depth: usize,
    policy: &DegreePolicy,
    mode: DeleteMode,
    stats: &mut Stats,
    ctx: &mut OpCtx,
) -> PointOut<V> {
    let Some(node) = slot.as_deref_mut() else {
        // Link a fresh single-key leaf; bounds stretch over stray keys.
        *slot = Some(Node::leaf(key, value, lower.min(key), upper.max(key + 1)));
        return PointOut {
            result: None,
            weight_delta: 1,
            live_delta: 1,
        };
    };
    stats.node_visits += 1;
    touch(node, depth, ctx, true);
    let counts = policy.counts_accesses();
    let mut out = match node.slot_for(key, policy) {
        SlotRef::Key(i) => {
            let mut live_delta = 0;
            if node.marked[i] {
                node.marked[i] = false;
                node.values[i] = value;
                node.live += 1;
                live_delta = 1;
            }
            if counts {
                node.key_accesses[i] += 1;
                node.accesses += 1;
            }
            PointOut {
                result: None,
                weight_delta: i64::from(counts),
                live_delta,
            }
        }
        SlotRef::Child(i) => {
            let (child_lower, child_upper) = node.child_bounds(i);
            let old_h = Node::child_height(&node.children[i]);
            let o = insert_rec(
                &mut node.children[i],
                key,
                value,
                child_lower,
                child_upper,
                depth + 1,
                policy,
                mode,
                stats,
                ctx,
            );
            apply_deltas(node, &o, i, old_h);
            o
        }
    };
    if ctx.claimed == Some(depth) {
        out.weight_delta += rebuild_slot(slot, policy, mode, stats, depth == 0 && ctx.tighten_root);
    }
    out
}

fn delete_rec<V: Clone>(
    slot: &mut Slot<V>,
    key: Key,
    depth: usize,
    policy: &DegreePolicy,
    mode: DeleteMode,
    stats: &mut Stats,
    ctx: &mut OpCtx,
) -> PointOut<V> {
    let Some(node) = slot.as_deref_mut() else {
        return PointOut {
            result: None,
            weight_delta: 0,
            live_delta: 0,
        };
    };
    stats.node_visits += 1;
    touch(node, depth, ctx, true);
    let counts = policy.counts_accesses();
    let mut out = match node.slot_for(key, policy) {
        SlotRef::Key(i) => {
            let mut live_delta = 0;
            if !node.marked[i] {
                node.marked[i] = true;
                node.live -= 1;
                live_delta = -1;
            }
            if counts {
                node.key_accesses[i] += 1;
                node.accesses += 1;
            }
            PointOut {
                result: None,
                weight_delta: i64::from(counts),
                live_delta,
            }
        }
        SlotRef::Child(i) => {
            let old_h = Node::child_height(&node.children[i]);
            let o = delete_rec(
                &mut node.children[i],
                key,
                depth + 1,
                policy,
                mode,
                stats,
                ctx,
            );
            apply_deltas(node, &o, i, old_h);
            o
        }
    };
    if ctx.claimed == Some(depth) {
        out.weight_delta += rebuild_slot(slot, policy, mode, stats, depth == 0 && ctx.tighten_root);
    }
    out
}

fn apply_deltas<V>(node: &mut Node<V>, out: &PointOut<V>, child: usize, old_child_height: i32) {
    node.accesses = node
        .accesses
        .checked_add_signed(out.weight_delta)
        .expect("subtree access balance");
    node.live = node
        .live
        .checked_add_signed(out.live_delta)
        .expect("subtree live balance");
    node.update_height_after_child(child, old_child_height);
}

/// Flattens the subtree (dropping tombstones unless lazy) and rebuilds it
/// into ideal shape with zeroed counters. Returns the change in total
/// accesses, for ancestor bookkeeping. A subtree of nothing but tombstones
/// rebuilds to an empty slot under standard deletes.
pub(crate) fn rebuild_slot<V>(
    slot: &mut Slot<V>,
    policy: &DegreePolicy,
    mode: DeleteMode,
    stats: &mut Stats,
    tighten: bool,
) -> i64 {
    let Some(node) = slot.take() else {
        return 0;
    };
    let before = node.accesses as i64;
    let (mut lower, mut upper) = (node.lower, node.upper);
    let mut entries = Vec::new();
    node.into_entries(mode == DeleteMode::LazyDelete, &mut entries);
    stats.rebuilds += 1;
    stats.rebuild_keys += entries.len() as u64;
    if let (Some(first), Some(last)) = (entries.first(), entries.last()) {
        if tighten {
            lower = first.key;
            upper = last.key + 1;
        } else {
            lower = lower.min(first.key);
            upper = upper.max(last.key + 1);
        }
    }
    let mut nodes_built = 0;
    *slot = build_tree(
        entries,
        lower,
        upper,
        policy,
        &mut nodes_built,
        &mut assemble,
    );
    stats.rebuild_nodes += nodes_built;
    let delta = slot.as_ref().map_or(0, |n| n.accesses) as i64 - before;
    if delta < 0 {
        stats.dropped_accesses += delta.unsigned_abs();
    }
    delta
}

fn audit_node<V>(node: &Node<V>, prev: &mut Option<Key>) -> Result<(), String> {
    let k = node.keys.len();
    if k == 0 {
        return Err("node without keys".into());
    }
    if node.children.len() != k + 1 {
        return Err(format!(
            "node with {k} keys has {} children",
            node.children.len()
        ));
    }
    if node.counter * 4 > node.accesses_at_rebuild {
        return Err(format!(
            "counter {} left overflowing (baseline {})",
            node.counter, node.accesses_at_rebuild
        ));
    }
    if node.accesses > node.accesses_at_rebuild + node.counter {
        return Err(format!(
            "accesses {} outgrew rebuild baseline {} + counter {}",
            node.accesses, node.accesses_at_rebuild, node.counter
        ));
    }
    let mut sum = 0u64;
    let mut live = 0u64;
    let mut height = -1i32;
    for i in 0..=k {
        if let Some(child) = node.children[i].as_deref() {
            audit_node(child, prev)?;
            sum += child.accesses;
            live += child.live;
            height = height.max(child.height as i32);
        }
        if i < k {
            let key = node.keys[i];
            if key < node.lower || key >= node.upper {
                return Err(format!(
                    "key {key} outside node bounds [{}, {})",
                    node.lower, node.upper
                ));
            }
            if let Some(p) = *prev {
                if key <= p {
                    return Err(format!("in-order violation: {key} after {p}"));
                }
            }
            *prev = Some(key);
            if node.key_accesses[i] == 0 {
                return Err(format!("key {key} has zero accesses"));
            }
            sum += node.key_accesses[i];
            live += u64::from(!node.marked[i]);
        }
    }
    if sum != node.accesses {
        return Err(format!(
            "access sum mismatch: stored {}, recomputed {sum}",
            node.accesses
        ));
    }
    if live != node.live {
        return Err(format!(
            "live mismatch: stored {}, recomputed {live}",
            node.live
        ));
    }
    if (height + 1).max(0) as u16 != node.height {
        return Err(format!(
            "height mismatch: stored {}, recomputed {}",
            node.height,
            (height + 1).max(0)
        ));
    }
    Ok(())
}
