//! Range-query extension: the same self-adjusting tree, with per-node
//! segment trees so that `range_get`, `range_calculate`, and
//! `range_update` can charge one access to every live key they touch and
//! apply value updates lazily to fully covered subtrees.
//!
//! Slot layout per node with k keys: [child₀, key₀, child₁, …, key_{k−1},
//! child_k] (2k+1 slots). Two per-node trees track it: a count tree
//! (access sums, live weights, pending access increments) and a value
//! tree (aggregates under the algebra, pending updates). Constant-degree
//! nodes skip the trees for plain arrays; both paths produce identical
//! observables.
//!
//! Discipline: a child's pending registers are flushed into it before any
//! descent, and a node's key slot is flushed before its access count or
//! value is read or written. Pending registers never advance operation
//! counters; counters track traversal only.

pub mod algebra;
mod slot_tree;

pub use algebra::{AlgebraName, MinAlgebra, RangeAlgebra, SumAdd, SumAssign};

use crate::build::{build_tree, validate_records, BuildError, RawNode};
use crate::interp::InterpolationIndex;
use crate::node::{Entry, KeyRecord};
use crate::policy::{DegreePolicy, DeleteMode, Key, SearchKind, Weighting};
use crate::search::{insertion_point, slot_at, SlotRef};
use crate::stats::Stats;
use slot_tree::{CountSpec, LazySlotTree, ValueSpec};

/// How per-node bookkeeping is realized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AggregatesMode {
    /// Segment trees for wide nodes, plain arrays when degree(m) ≤ 32.
    #[default]
    Auto,
    /// Plain arrays everywhere (correct, but O(k) per covered range).
    ForceFlat,
    /// Segment trees everywhere.
    ForceSeg,
}

const FLAT_DEGREE_LIMIT: u64 = 32;

struct SegAgg<A: RangeAlgebra> {
    cnt: LazySlotTree<u64, u64>,
    val: LazySlotTree<A::Value, A::Update>,
}

struct FlatAgg<A: RangeAlgebra> {
    /// Per-slot value aggregates (children and keys interleaved).
    fval: Vec<A::Value>,
    /// Pending access increments per child slot.
    pend_cnt: Vec<u64>,
    /// Pending updates per child slot.
    pend_upd: Vec<A::Update>,
}

enum Agg<A: RangeAlgebra> {
    Flat(FlatAgg<A>),
    Seg(SegAgg<A>),
}

type RSlot<A> = Option<Box<RNode<A>>>;

struct RNode<A: RangeAlgebra> {
    keys: Vec<Key>,
    values: Vec<A::Value>,
    key_accesses: Vec<u64>,
    marked: Vec<bool>,
    children: Vec<RSlot<A>>,
    accesses: u64,
    accesses_at_rebuild: u64,
    counter: u64,
    live: u64,
    lower: Key,
    upper: Key,
    height: u16,
    interp: Option<Box<InterpolationIndex>>,
    agg: Agg<A>,
}

#[inline]
fn child_slot(i: usize) -> usize {
    2 * i
}

#[inline]
fn key_slot(i: usize) -> usize {
    2 * i + 1
}

impl<A: RangeAlgebra> RNode<A> {
    fn slot_count(&self) -> usize {
        2 * self.keys.len() + 1
    }

    fn slot_for(&self, key: Key, policy: &DegreePolicy) -> SlotRef {
        let point = match (policy.search, &self.interp) {
            (SearchKind::Interpolation, Some(idx)) => idx.lookup(&self.keys, key),
            _ => insertion_point(&self.keys, key),
        };
        slot_at(&self.keys, point, key)
    }

    fn child_bounds(&self, i: usize) -> (Key, Key) {
        let lo = if i == 0 {
            self.lower
        } else {
            self.keys[i - 1] + 1
        };
        let hi = if i == self.keys.len() {
            self.upper
        } else {
            self.keys[i]
        };
        (lo, hi)
    }

    fn child_height(slot: &RSlot<A>) -> i32 {
        slot.as_ref().map_or(-1, |n| n.height as i32)
    }

    fn recompute_height(&mut self) {
        let below = self
            .children
            .iter()
            .map(Self::child_height)
            .max()
            .unwrap_or(-1);
        self.height = (below + 1).max(0) as u16;
    }

    fn update_height_after_child(&mut self, i: usize, old_child_height: i32) {
        let new_h = Self::child_height(&self.children[i]);
        if new_h > old_child_height {
            if new_h + 1 > self.height as i32 {
                self.height = (new_h + 1) as u16;
            }
        } else if new_h < old_child_height && old_child_height + 1 == self.height as i32 {
            self.recompute_height();
        }
    }

    fn value_total(&self, alg: &A) -> A::Value {
        match &self.agg {
            Agg::Seg(s) => s.val.total().clone(),
            Agg::Flat(f) => {
                let mut acc = alg.identity();
                for v in &f.fval {
                    acc = alg.combine(&acc, v);
                }
                acc
            }
        }
    }

    /// Lazily adds `amount` accesses per live key and applies `update`
    /// over the slot range. Returns the live keys covered (the access
    /// charge per unit of `amount`).
    fn accrue(
        &mut self,
        alg: &A,
        slot_lo: usize,
        slot_hi: usize,
        amount: u64,
        update: Option<&A::Update>,
    ) -> u64 {
        let RNode {
            agg,
            keys,
            values,
            key_accesses,
            marked,
            children,
            ..
        } = self;
        match agg {
            Agg::Seg(s) => {
                let live = s.cnt.live_in(slot_lo, slot_hi);
                if amount > 0 {
                    s.cnt.apply_range(&CountSpec, slot_lo, slot_hi, &amount);
                }
                if let Some(u) = update {
                    if !alg.is_no_update(u) {
                        s.val.apply_range(&ValueSpec(alg), slot_lo, slot_hi, u);
                    }
                }
                live
            }
            Agg::Flat(f) => {
                let _ = keys;
                let mut live = 0;
                for slot in slot_lo..=slot_hi {
                    if slot % 2 == 1 {
                        let i = slot / 2;
                        if !marked[i] {
                            live += 1;
                            key_accesses[i] += amount;
                            if let Some(u) = update {
                                if !alg.is_no_update(u) {
                                    values[i] = alg.apply(u, &values[i], 1);
                                    f.fval[slot] = values[i].clone();
                                }
                            }
                        }
                    } else {
                        let ci = slot / 2;
                        if let Some(child) = children[ci].as_deref() {
                            live += child.live;
                            f.pend_cnt[ci] += amount;
                            if let Some(u) = update {
                                if !alg.is_no_update(u) {
                                    f.pend_upd[ci] = alg.compose(u, &f.pend_upd[ci]);
                                    f.fval[slot] = alg.apply(u, &f.fval[slot], child.live);
                                }
                            }
                        }
                    }
                }
                live
            }
        }
    }

    /// Absorbs a pending (count, update) pair delivered from the parent.
    fn receive(&mut self, alg: &A, amount: u64, update: &A::Update) {
        if amount > 0 {
            self.accesses += amount * self.live;
        }
        let hi = self.slot_count() - 1;
        let update = (!alg.is_no_update(update)).then_some(update);
        self.accrue(alg, 0, hi, amount, update);
    }

    /// Delivers slot `i`'s pending registers into the child (or discards
    /// them if the slot is empty — nothing was ever charged for it).
    fn flush_child(&mut self, alg: &A, i: usize) {
        let (amount, update) = match &mut self.agg {
            Agg::Seg(s) => (
                s.cnt.flush_slot(&CountSpec, child_slot(i)),
                s.val.flush_slot(&ValueSpec(alg), child_slot(i)),
            ),
            Agg::Flat(f) => (
                std::mem::take(&mut f.pend_cnt[i]),
                std::mem::replace(&mut f.pend_upd[i], alg.no_update()),
            ),
        };
        if amount == 0 && alg.is_no_update(&update) {
            return;
        }
        if let Some(child) = self.children[i].as_deref_mut() {
            child.receive(alg, amount, &update);
        }
    }

    /// Materializes slot `i`'s pending register onto the node's own key.
    /// Pendings that accumulated while the key was marked are dropped:
    /// they charged nothing (live weight zero) and marked values stay
    /// frozen.
    fn flush_key(&mut self, alg: &A, i: usize) {
        let RNode {
            agg,
            values,
            key_accesses,
            marked,
            ..
        } = self;
        if let Agg::Seg(s) = agg {
            let amount = s.cnt.flush_slot(&CountSpec, key_slot(i));
            let update = s.val.flush_slot(&ValueSpec(alg), key_slot(i));
            if !marked[i] {
                key_accesses[i] += amount;
                if !alg.is_no_update(&update) {
                    values[i] = alg.apply(&update, &values[i], 1);
                }
            }
        }
    }

    /// Rewrites slot `i`'s leaves after the key's state changed.
    fn refresh_key(&mut self, alg: &A, i: usize) {
        let live = u64::from(!self.marked[i]);
        let fv = if self.marked[i] {
            alg.identity()
        } else {
            self.values[i].clone()
        };
        let cnt = self.key_accesses[i];
        match &mut self.agg {
            Agg::Seg(s) => {
                s.cnt.set_slot(&CountSpec, key_slot(i), cnt, live);
                s.val.set_slot(&ValueSpec(alg), key_slot(i), fv, live);
            }
            Agg::Flat(f) => f.fval[key_slot(i)] = fv,
        }
    }

    /// Rewrites slot `i`'s leaves after the child subtree changed.
    fn refresh_child(&mut self, alg: &A, i: usize) {
        let (m, live, fv) = match self.children[i].as_deref() {
            Some(c) => (c.accesses, c.live, c.value_total(alg)),
            None => (0, 0, alg.identity()),
        };
        match &mut self.agg {
            Agg::Seg(s) => {
                s.cnt.set_slot(&CountSpec, child_slot(i), m, live);
                s.val.set_slot(&ValueSpec(alg), child_slot(i), fv, live);
            }
            Agg::Flat(f) => f.fval[child_slot(i)] = fv,
        }
    }

    /// Pushes every pending register in the subtree down to the keys.
    fn flush_all(&mut self, alg: &A) {
        for i in 0..=self.keys.len() {
            self.flush_child(alg, i);
            if i < self.keys.len() {
                self.flush_key(alg, i);
            }
            if let Some(child) = self.children[i].as_deref_mut() {
                child.flush_all(alg);
            }
        }
    }

    /// In-order live keys, flushing pendings on the way down.
    fn collect_live(&mut self, alg: &A, out: &mut Vec<Key>, stats: &mut Stats) {
        stats.collect_visits += 1;
        for i in 0..self.keys.len() {
            self.flush_child(alg, i);
            if let Some(child) = self.children[i].as_deref_mut() {
                child.collect_live(alg, out, stats);
            }
            self.flush_key(alg, i);
            if !self.marked[i] {
                out.push(self.keys[i]);
            }
        }
        let last = self.keys.len();
        self.flush_child(alg, last);
        if let Some(child) = self.children[last].as_deref_mut() {
            child.collect_live(alg, out, stats);
        }
    }

    fn into_entries(self, keep_marked: bool, out: &mut Vec<Entry<A::Value>>) {
        let RNode {
            keys,
            values,
            key_accesses,
            marked,
            children,
            ..
        } = self;
        let mut children = children.into_iter();
        let mut values = values.into_iter();
        for i in 0..keys.len() {
            if let Some(child) = children.next().flatten() {
                child.into_entries(keep_marked, out);
            }
            let value = values.next().expect("values aligned with keys");
            if keep_marked || !marked[i] {
                out.push(Entry {
                    key: keys[i],
                    value,
                    accesses: key_accesses[i],
                    marked: marked[i],
                });
            }
        }
        if let Some(child) = children.next().flatten() {
            child.into_entries(keep_marked, out);
        }
    }

    /// True when the child subtree in slot `i` lies entirely inside
    /// `[a, b]`. Subtree bounds always cover the subtree's content.
    fn child_covered(&self, i: usize, a: Key, b: Key) -> bool {
        match self.children[i].as_deref() {
            Some(c) => a <= c.lower && c.upper - 1 <= b,
            None => true,
        }
    }

    /// Whether the left-boundary descent must continue into slot `lo`.
    /// Once `a` itself is one of this node's keys (or the child's bounds
    /// rule out any key ≥ a) there is nothing in range below-left.
    fn left_boundary_needed(&self, lo: usize, a: Key) -> bool {
        if lo < self.keys.len() && self.keys[lo] == a {
            return false;
        }
        match self.children[lo].as_deref() {
            Some(c) => c.upper > a,
            None => false,
        }
    }

    /// Mirror image for the right-boundary descent into slot `hi`.
    fn right_boundary_needed(&self, hi: usize, b: Key) -> bool {
        if hi > 0 && self.keys[hi - 1] == b {
            return false;
        }
        match self.children[hi].as_deref() {
            Some(c) => c.lower <= b,
            None => false,
        }
    }

    fn aggregate_cells(&self) -> usize {
        match &self.agg {
            Agg::Seg(s) => s.cnt.cells() + s.val.cells(),
            Agg::Flat(f) => f.fval.len() + f.pend_cnt.len() + f.pend_upd.len(),
        }
    }
}

fn make_agg<A: RangeAlgebra>(
    raw: &RawNode<A::Value, RNode<A>>,
    alg: &A,
    policy: &DegreePolicy,
    mode: AggregatesMode,
) -> Agg<A> {
    let k = raw.keys.len();
    let wide = policy.degree.degree(raw.accesses).max(1) > FLAT_DEGREE_LIMIT;
    let seg = match mode {
        AggregatesMode::Auto => wide,
        AggregatesMode::ForceFlat => false,
        AggregatesMode::ForceSeg => true,
    };
    if seg {
        let mut cnt_leaves = Vec::with_capacity(2 * k + 1);
        let mut val_leaves = Vec::with_capacity(2 * k + 1);
        for i in 0..=k {
            match raw.children[i].as_deref() {
                Some(c) => {
                    cnt_leaves.push((c.accesses, c.live));
                    val_leaves.push((c.value_total(alg), c.live));
                }
                None => {
                    cnt_leaves.push((0, 0));
                    val_leaves.push((alg.identity(), 0));
                }
            }
            if i < k {
                let live = u64::from(!raw.marked[i]);
                cnt_leaves.push((raw.key_accesses[i], live));
                let fv = if raw.marked[i] {
                    alg.identity()
                } else {
                    raw.values[i].clone()
                };
                val_leaves.push((fv, live));
            }
        }
        Agg::Seg(SegAgg {
            cnt: LazySlotTree::new(&CountSpec, cnt_leaves),
            val: LazySlotTree::new(&ValueSpec(alg), val_leaves),
        })
    } else {
        let mut fval = Vec::with_capacity(2 * k + 1);
        for i in 0..=k {
            fval.push(match raw.children[i].as_deref() {
                Some(c) => c.value_total(alg),
                None => alg.identity(),
            });
            if i < k {
                fval.push(if raw.marked[i] {
                    alg.identity()
                } else {
                    raw.values[i].clone()
                });
            }
        }
        let mut pend_upd = Vec::with_capacity(k + 1);
        pend_upd.resize_with(k + 1, || alg.no_update());
        Agg::Flat(FlatAgg {
            fval,
            pend_cnt: vec![0; k + 1],
            pend_upd,
        })
    }
}

fn assemble_rnode<A: RangeAlgebra>(
    raw: RawNode<A::Value, RNode<A>>,
    alg: &A,
    policy: &DegreePolicy,
    mode: AggregatesMode,
) -> Box<RNode<A>> {
    let agg = make_agg(&raw, alg, policy, mode);
    Box::new(RNode {
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
        agg,
    })
}

fn fresh_leaf<A: RangeAlgebra>(
    key: Key,
    value: A::Value,
    lower: Key,
    upper: Key,
    alg: &A,
    policy: &DegreePolicy,
    mode: AggregatesMode,
) -> Box<RNode<A>> {
    let raw = RawNode {
        keys: vec![key],
        values: vec![value],
        key_accesses: vec![1],
        marked: vec![false],
        children: vec![None, None],
        accesses: 1,
        live: 1,
        lower,
        upper,
        height: 0,
        interp: None,
    };
    assemble_rnode(raw, alg, policy, mode)
}

/// Self-adjusting tree with range queries under the algebra `A`.
pub struct RangeGsat<A: RangeAlgebra> {
    root: RSlot<A>,
    policy: DegreePolicy,
    delete_mode: DeleteMode,
    agg_mode: AggregatesMode,
    alg: A,
    lower: Key,
    upper: Key,
    explicit_bounds: bool,
    stats: Stats,
}

struct PointCtx {
    claimed: Option<usize>,
}

struct RangeCtx {
    path: Vec<usize>,
    /// Minimum-depth overflowing node: (depth, child-slot route from root).
    best: Option<(usize, Vec<usize>)>,
}

struct PointOut<T> {
    result: Option<T>,
    weight_delta: i64,
    live_delta: i64,
}

impl<A: RangeAlgebra> RangeGsat<A> {
    pub fn new(policy: DegreePolicy, alg: A) -> Self {
        assert_eq!(
            policy.weighting,
            Weighting::AccessCounts,
            "range trees track access counts"
        );
        RangeGsat {
            root: None,
            policy,
            delete_mode: DeleteMode::Standard,
            agg_mode: AggregatesMode::Auto,
            alg,
            lower: Key::MIN,
            upper: Key::MAX,
            explicit_bounds: false,
            stats: Stats::default(),
        }
    }

    pub fn with_bounds(policy: DegreePolicy, alg: A, lower: Key, upper: Key) -> Self {
        assert!(lower < upper, "invalid bounds [{lower}, {upper})");
        let mut t = Self::new(policy, alg);
        t.lower = lower;
        t.upper = upper;
        t.explicit_bounds = true;
        t
    }

    pub fn from_records(
        records: Vec<KeyRecord<A::Value>>,
        lower: Key,
        upper: Key,
        policy: DegreePolicy,
        alg: A,
    ) -> Result<Self, BuildError> {
        let entries: Vec<Entry<A::Value>> = records
            .into_iter()
            .map(|r| Entry {
                key: r.key,
                value: r.value,
                accesses: r.accesses,
                marked: false,
            })
            .collect();
        validate_records(&entries, lower, upper)?;
        let mut tree = Self::with_bounds(policy, alg, lower, upper);
        let mut nodes_built = 0;
        let (policy_ref, alg_ref, mode) = (&tree.policy, &tree.alg, tree.agg_mode);
        tree.root = build_tree(
            entries,
            lower,
            upper,
            policy_ref,
            &mut nodes_built,
            &mut |raw| assemble_rnode(raw, alg_ref, policy_ref, mode),
        );
        Ok(tree)
    }

    pub fn set_delete_mode(&mut self, mode: DeleteMode) {
        self.delete_mode = mode;
    }

    /// Applies to nodes created from now on; existing nodes keep their
    /// current representation until rebuilt.
    pub fn set_aggregates_mode(&mut self, mode: AggregatesMode) {
        self.agg_mode = mode;
    }

    pub fn len(&self) -> usize {
        self.root.as_ref().map_or(0, |n| n.live as usize)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn total_accesses(&self) -> u64 {
        self.root.as_ref().map_or(0, |n| n.accesses)
    }

    pub fn depth(&self) -> usize {
        self.root.as_ref().map_or(0, |n| n.height as usize)
    }

    pub fn node_count(&self) -> usize {
        fn walk<A: RangeAlgebra>(node: &RNode<A>) -> usize {
            1 + node
                .children
                .iter()
                .flatten()
                .map(|c| walk(c))
                .sum::<usize>()
        }
        self.root.as_deref().map_or(0, walk)
    }

    /// Depth of the node physically holding `key` (root = 0); does not
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

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    pub fn reset_stats(&mut self) {
        self.stats.reset();
    }

    pub fn get(&mut self, key: Key) -> Option<A::Value> {
        let mut ctx = PointCtx { claimed: None };
        let out = point_rec(
            &mut self.root,
            PointOp::Get,
            key,
            self.lower,
            self.upper,
            0,
            &self.policy,
            self.delete_mode,
            self.agg_mode,
            &self.alg,
            &mut self.stats,
            &mut ctx,
            !self.explicit_bounds,
        );
        out.result
    }

    pub fn insert(&mut self, key: Key, value: A::Value) {
        assert!(key < Key::MAX, "key i64::MAX is reserved");
        let mut ctx = PointCtx { claimed: None };
        point_rec(
            &mut self.root,
            PointOp::Insert(value),
            key,
            self.lower,
            self.upper,
            0,
            &self.policy,
            self.delete_mode,
            self.agg_mode,
            &self.alg,
            &mut self.stats,
            &mut ctx,
            !self.explicit_bounds,
        );
    }

    pub fn delete(&mut self, key: Key) {
        let mut ctx = PointCtx { claimed: None };
        point_rec(
            &mut self.root,
            PointOp::Delete,
            key,
            self.lower,
            self.upper,
            0,
            &self.policy,
            self.delete_mode,
            self.agg_mode,
            &self.alg,
            &mut self.stats,
            &mut ctx,
            !self.explicit_bounds,
        );
    }

    /// All live keys in `[a, b]` in increasing order. Every returned key
    /// gains one access; fully covered subtrees are charged through their
    /// pending registers before being walked.
    pub fn range_get(&mut self, a: Key, b: Key) -> Vec<Key> {
        assert!(a <= b, "range_get bounds out of order: {a} > {b}");
        let mut out = Vec::new();
        let mut ctx = RangeCtx {
            path: Vec::new(),
            best: None,
        };
        collect_rec(
            &mut self.root,
            a,
            b,
            &self.alg,
            &mut out,
            &mut ctx,
            &mut self.stats,
            0,
        );
        self.finish_range(ctx);
        out
    }

    /// Folds the algebra over every live value with key in `[a, b]`, in
    /// key order; identity for an empty range. Charges one access per
    /// covered live key.
    pub fn range_calculate(&mut self, a: Key, b: Key) -> A::Value {
        assert!(a <= b, "range_calculate bounds out of order: {a} > {b}");
        let mut ctx = RangeCtx {
            path: Vec::new(),
            best: None,
        };
        let (value, _) = calculate_rec(
            &mut self.root,
            a,
            b,
            &self.alg,
            &mut ctx,
            &mut self.stats,
            0,
        );
        self.finish_range(ctx);
        value
    }

    /// Applies the update to every live value with key in `[a, b]` and
    /// charges one access per covered live key.
    pub fn range_update(&mut self, a: Key, b: Key, update: A::Update) {
        assert!(a <= b, "range_update bounds out of order: {a} > {b}");
        let mut ctx = RangeCtx {
            path: Vec::new(),
            best: None,
        };
        update_rec(
            &mut self.root,
            a,
            b,
            &update,
            &self.alg,
            &mut ctx,
            &mut self.stats,
            0,
        );
        self.finish_range(ctx);
    }

    /// In-order live keys of the whole tree; flushes pendings, charges
    /// nothing.
    pub fn live_keys(&mut self) -> Vec<Key> {
        let mut out = Vec::new();
        if let Some(root) = self.root.as_deref_mut() {
            root.collect_live(&self.alg, &mut out, &mut self.stats);
        }
        out
    }

    /// Materializes every pending register in the tree.
    pub fn flush_all(&mut self) {
        if let Some(root) = self.root.as_deref_mut() {
            root.flush_all(&self.alg);
        }
    }

    /// In-order records with materialized access counts and values.
    pub fn flatten(&mut self, include_marked: bool) -> Vec<KeyRecord<A::Value>> {
        self.flush_all();
        let mut out = Vec::new();
        if let Some(node) = self.root.as_deref() {
            collect_records(node, include_marked, &mut out);
        }
        out
    }

    pub fn force_rebuild(&mut self) {
        rebuild_rslot(
            &mut self.root,
            &self.policy,
            self.delete_mode,
            self.agg_mode,
            &self.alg,
            &mut self.stats,
            !self.explicit_bounds,
        );
    }

    pub fn check_ideal(&self) -> bool {
        fn check<A: RangeAlgebra>(node: &RNode<A>, policy: &DegreePolicy) -> bool {
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

    /// Total aggregate cells across the tree, for memory accounting.
    pub fn aggregate_cells(&self) -> usize {
        fn walk<A: RangeAlgebra>(node: &RNode<A>) -> usize {
            node.aggregate_cells()
                + node
                    .children
                    .iter()
                    .flatten()
                    .map(|c| walk(c))
                    .sum::<usize>()
        }
        self.root.as_ref().map_or(0, |n| walk(n))
    }

    /// Structural audit. Flushes all pendings first so that stored scalars
    /// can be compared against recomputed sums exactly. Counter bounds are
    /// not asserted: a range query rebuilds only the shallowest overflowing
    /// node, so an overflow on the other boundary path may persist until
    /// the next operation reaches it.
    pub fn check_invariants(&mut self) -> Result<(), String> {
        self.flush_all();
        let alg_total = self
            .root
            .as_ref()
            .map(|n| n.value_total(&self.alg))
            .unwrap_or_else(|| self.alg.identity());
        let Some(root) = self.root.as_deref() else {
            return Ok(());
        };
        let mut prev = None;
        let mut recomputed = self.alg.identity();
        audit_rnode(root, &self.alg, &mut prev, &mut recomputed)?;
        if recomputed != alg_total {
            return Err(format!(
                "aggregate mismatch: stored {alg_total:?}, recomputed {recomputed:?}"
            ));
        }
        Ok(())
    }

    fn finish_range(&mut self, ctx: RangeCtx) {
        if let Some((_, route)) = ctx.best {
            rebuild_on_route(
                &mut self.root,
                &route,
                0,
                &self.policy,
                self.delete_mode,
                self.agg_mode,
                &self.alg,
                &mut self.stats,
                !self.explicit_bounds,
            );
        }
    }
}

fn collect_records<A: RangeAlgebra>(
    node: &RNode<A>,
    include_marked: bool,
    out: &mut Vec<KeyRecord<A::Value>>,
) {
    for i in 0..node.keys.len() {
        if let Some(child) = node.children[i].as_deref() {
            collect_records(child, include_marked, out);
        }
        if include_marked || !node.marked[i] {
            out.push(KeyRecord {
                key: node.keys[i],
                value: node.values[i].clone(),
                accesses: node.key_accesses[i],
            });
        }
    }
    if let Some(child) = node.children[node.keys.len()].as_deref() {
        collect_records(child, include_marked, out);
    }
}

enum PointOp<T> {
    Get,
    Insert(T),
    Delete,
}

#[allow(clippy::too_many_arguments)]
fn point_rec<A: RangeAlgebra>(
    slot: &mut RSlot<A>,
    op: PointOp<A::Value>,
    key: Key,
    lower: Key,
    upper: Key,
    depth: usize,
    policy: &DegreePolicy,
    mode: DeleteMode,
    agg_mode: AggregatesMode,
    alg: &A,
    stats: &mut Stats,
    ctx: &mut PointCtx,
    tighten_root: bool,
) -> PointOut<A::Value> {
    let Some(node) = slot.as_deref_mut() else {
        if let PointOp::Insert(value) = op {
            *slot = Some(fresh_leaf(
                key,
                value,
                lower.min(key),
                upper.max(key + 1),
                alg,
                policy,
                agg_mode,
            ));
            return PointOut {
                result: None,
                weight_delta: 1,
                live_delta: 1,
            };
        }
        return PointOut {
            result: None,
            weight_delta: 0,
            live_delta: 0,
        };
    };
    stats.node_visits += 1;
    node.counter += 1;
    if ctx.claimed.is_none() && node.counter * 4 > node.accesses_at_rebuild {
        ctx.claimed = Some(depth);
    }
    let mut out = match node.slot_for(key, policy) {
        SlotRef::Key(i) => {
            node.flush_key(alg, i);
            let mut live_delta = 0i64;
            let result = match op {
                PointOp::Get => (!node.marked[i]).then(|| node.values[i].clone()),
                PointOp::Insert(value) => {
                    if node.marked[i] {
                        node.marked[i] = false;
                        node.values[i] = value;
                        node.live += 1;
                        live_delta = 1;
                    }
                    None
                }
                PointOp::Delete => {
                    if !node.marked[i] {
                        node.marked[i] = true;
                        node.live -= 1;
                        live_delta = -1;
                    }
                    None
                }
            };
            node.key_accesses[i] += 1;
            node.accesses += 1;
            node.refresh_key(alg, i);
            PointOut {
                result,
                weight_delta: 1,
                live_delta,
            }
        }
        SlotRef::Child(i) => {
            let (child_lower, child_upper) = node.child_bounds(i);
            node.flush_child(alg, i);
            let old_h = RNode::child_height(&node.children[i]);
            let o = point_rec(
                &mut node.children[i],
                op,
                key,
                child_lower,
                child_upper,
                depth + 1,
                policy,
                mode,
                agg_mode,
                alg,
                stats,
                ctx,
                tighten_root,
            );
            node.accesses = node
                .accesses
                .checked_add_signed(o.weight_delta)
                .expect("subtree access balance");
            node.live = node
                .live
                .checked_add_signed(o.live_delta)
                .expect("subtree live balance");
            node.update_height_after_child(i, old_h);
            node.refresh_child(alg, i);
            o
        }
    };
    if ctx.claimed == Some(depth) {
        out.weight_delta += rebuild_rslot(
            slot,
            policy,
            mode,
            agg_mode,
            alg,
            stats,
            depth == 0 && tighten_root,
        );
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn rebuild_rslot<A: RangeAlgebra>(
    slot: &mut RSlot<A>,
    policy: &DegreePolicy,
    mode: DeleteMode,
    agg_mode: AggregatesMode,
    alg: &A,
    stats: &mut Stats,
    tighten: bool,
) -> i64 {
    let Some(mut node) = slot.take() else {
        return 0;
    };
    node.flush_all(alg);
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
        &mut |raw| assemble_rnode(raw, alg, policy, agg_mode),
    );
    stats.rebuild_nodes += nodes_built;
    let delta = slot.as_ref().map_or(0, |n| n.accesses) as i64 - before;
    if delta < 0 {
        stats.dropped_accesses += delta.unsigned_abs();
    }
    delta
}

/// Walks the recorded child-slot route and rebuilds the subtree at its
/// end, fixing ancestor bookkeeping on the way back up.
#[allow(clippy::too_many_arguments)]
fn rebuild_on_route<A: RangeAlgebra>(
    slot: &mut RSlot<A>,
    route: &[usize],
    idx: usize,
    policy: &DegreePolicy,
    mode: DeleteMode,
    agg_mode: AggregatesMode,
    alg: &A,
    stats: &mut Stats,
    tighten_root: bool,
) -> i64 {
    if idx == route.len() {
        return rebuild_rslot(
            slot,
            policy,
            mode,
            agg_mode,
            alg,
            stats,
            idx == 0 && tighten_root,
        );
    }
    let node = slot
        .as_deref_mut()
        .expect("route recorded during this operation");
    let i = route[idx];
    let old_h = RNode::child_height(&node.children[i]);
    let delta = rebuild_on_route(
        &mut node.children[i],
        route,
        idx + 1,
        policy,
        mode,
        agg_mode,
        alg,
        stats,
        tighten_root,
    );
    node.accesses = node
        .accesses
        .checked_add_signed(delta)
        .expect("subtree access balance");
    node.update_height_after_child(i, old_h);
    node.refresh_child(alg, i);
    delta
}

fn touch_range<A: RangeAlgebra>(node: &mut RNode<A>, depth: usize, ctx: &mut RangeCtx) {
    node.counter += 1;
    if node.counter * 4 > node.accesses_at_rebuild
        && ctx.best.as_ref().is_none_or(|(d, _)| depth < *d)
    {
        ctx.best = Some((depth, ctx.path.clone()));
    }
}

/// Charges one pending access per live key in the covered child slot,
/// delivers the registers, and walks the child collecting live keys.
fn covered_collect<A: RangeAlgebra>(
    node: &mut RNode<A>,
    alg: &A,
    i: usize,
    out: &mut Vec<Key>,
    stats: &mut Stats,
) -> u64 {
    let charged = node.accrue(alg, child_slot(i), child_slot(i), 1, None);
    node.flush_child(alg, i);
    if let Some(child) = node.children[i].as_deref_mut() {
        child.collect_live(alg, out, stats);
    }
    charged
}

#[allow(clippy::too_many_arguments)]
fn collect_rec<A: RangeAlgebra>(
    slot: &mut RSlot<A>,
    a: Key,
    b: Key,
    alg: &A,
    out: &mut Vec<Key>,
    ctx: &mut RangeCtx,
    stats: &mut Stats,
    depth: usize,
) -> u64 {
    let Some(node) = slot.as_deref_mut() else {
        return 0;
    };
    stats.node_visits += 1;
    touch_range(node, depth, ctx);
    let lo = insertion_point(&node.keys, a);
    let hi = node.keys.partition_point(|&k| k <= b);
    let mut charge = 0u64;
    if lo >= hi {
        // No covered key: the whole query lives in one child slot.
        if node.child_covered(lo, a, b) {
            charge += covered_collect(node, alg, lo, out, stats);
        } else {
            node.flush_child(alg, lo);
            ctx.path.push(lo);
            charge += collect_rec(
                &mut node.children[lo],
                a,
                b,
                alg,
                out,
                ctx,
                stats,
                depth + 1,
            );
            ctx.path.pop();
            node.refresh_child(alg, lo);
        }
    } else {
        if node.left_boundary_needed(lo, a) {
            if node.child_covered(lo, a, b) {
                charge += covered_collect(node, alg, lo, out, stats);
            } else {
                node.flush_child(alg, lo);
                ctx.path.push(lo);
                charge += collect_rec(
                    &mut node.children[lo],
                    a,
                    b,
                    alg,
                    out,
                    ctx,
                    stats,
                    depth + 1,
                );
                ctx.path.pop();
                node.refresh_child(alg, lo);
            }
        }
        for i in lo..hi {
            node.flush_key(alg, i);
            if !node.marked[i] {
                node.key_accesses[i] += 1;
                node.refresh_key(alg, i);
                out.push(node.keys[i]);
                charge += 1;
            }
            if i + 1 < hi {
                charge += covered_collect(node, alg, i + 1, out, stats);
            }
        }
        if node.right_boundary_needed(hi, b) {
            if node.child_covered(hi, a, b) {
                charge += covered_collect(node, alg, hi, out, stats);
            } else {
                node.flush_child(alg, hi);
                ctx.path.push(hi);
                charge += collect_rec(
                    &mut node.children[hi],
                    a,
                    b,
                    alg,
                    out,
                    ctx,
                    stats,
                    depth + 1,
                );
                ctx.path.pop();
                node.refresh_child(alg, hi);
            }
        }
    }
    node.accesses += charge;
    charge
}

#[allow(clippy::too_many_arguments)]
fn calculate_rec<A: RangeAlgebra>(
    slot: &mut RSlot<A>,
    a: Key,
    b: Key,
    alg: &A,
    ctx: &mut RangeCtx,
    stats: &mut Stats,
    depth: usize,
) -> (A::Value, u64) {
    let Some(node) = slot.as_deref_mut() else {
        return (alg.identity(), 0);
    };
    stats.node_visits += 1;
    touch_range(node, depth, ctx);
    let lo = insertion_point(&node.keys, a);
    let hi = node.keys.partition_point(|&k| k <= b);
    let mut charge = 0u64;
    let value;
    if lo >= hi {
        if node.child_covered(lo, a, b) {
            value = node.query_fvals(alg, child_slot(lo), child_slot(lo));
            charge += node.accrue(alg, child_slot(lo), child_slot(lo), 1, None);
        } else {
            node.flush_child(alg, lo);
            ctx.path.push(lo);
            let (v, c) = calculate_rec(&mut node.children[lo], a, b, alg, ctx, stats, depth + 1);
            ctx.path.pop();
            node.refresh_child(alg, lo);
            value = v;
            charge += c;
        }
    } else {
        let left = if !node.left_boundary_needed(lo, a) {
            alg.identity()
        } else if node.child_covered(lo, a, b) {
            let v = node.query_fvals(alg, child_slot(lo), child_slot(lo));
            charge += node.accrue(alg, child_slot(lo), child_slot(lo), 1, None);
            v
        } else {
            node.flush_child(alg, lo);
            ctx.path.push(lo);
            let (v, c) = calculate_rec(&mut node.children[lo], a, b, alg, ctx, stats, depth + 1);
            ctx.path.pop();
            node.refresh_child(alg, lo);
            charge += c;
            v
        };
        // Covered keys lo..hi and the child slots strictly between them,
        // in one slot-range read plus one slot-range charge.
        let mid = node.query_fvals(alg, key_slot(lo), key_slot(hi - 1));
        charge += node.accrue(alg, key_slot(lo), key_slot(hi - 1), 1, None);
        let right = if !node.right_boundary_needed(hi, b) {
            alg.identity()
        } else if node.child_covered(hi, a, b) {
            let v = node.query_fvals(alg, child_slot(hi), child_slot(hi));
            charge += node.accrue(alg, child_slot(hi), child_slot(hi), 1, None);
            v
        } else {
            node.flush_child(alg, hi);
            ctx.path.push(hi);
            let (v, c) = calculate_rec(&mut node.children[hi], a, b, alg, ctx, stats, depth + 1);
            ctx.path.pop();
            node.refresh_child(alg, hi);
            charge += c;
            v
        };
        value = alg.combine(&alg.combine(&left, &mid), &right);
    }
    node.accesses += charge;
    (value, charge)
}

#[allow(clippy::too_many_arguments)]
fn update_rec<A: RangeAlgebra>(
    slot: &mut RSlot<A>,
    a: Key,
    b: Key,
    update: &A::Update,
    alg: &A,
    ctx: &mut RangeCtx,
    stats: &mut Stats,
    depth: usize,
) -> u64 {
    let Some(node) = slot.as_deref_mut() else {
        return 0;
    };
    stats.node_visits += 1;
    touch_range(node, depth, ctx);
    let lo = insertion_point(&node.keys, a);
    let hi = node.keys.partition_point(|&k| k <= b);
    let mut charge = 0u64;
    if lo >= hi {
        if node.child_covered(lo, a, b) {
            charge += node.accrue(alg, child_slot(lo), child_slot(lo), 1, Some(update));
        } else {
            node.flush_child(alg, lo);
            ctx.path.push(lo);
            charge += update_rec(
                &mut node.children[lo],
                a,
                b,
                update,
                alg,
                ctx,
                stats,
                depth + 1,
            );
            ctx.path.pop();
            node.refresh_child(alg, lo);
        }
    } else {
        if node.left_boundary_needed(lo, a) {
            if node.child_covered(lo, a, b) {
                charge += node.accrue(alg, child_slot(lo), child_slot(lo), 1, Some(update));
            } else {
                node.flush_child(alg, lo);
                ctx.path.push(lo);
                charge += update_rec(
                    &mut node.children[lo],
                    a,
                    b,
                    update,
                    alg,
                    ctx,
                    stats,
                    depth + 1,
                );
                ctx.path.pop();
                node.refresh_child(alg, lo);
            }
        }
        charge += node.accrue(alg, key_slot(lo), key_slot(hi - 1), 1, Some(update));
        if node.right_boundary_needed(hi, b) {
            if node.child_covered(hi, a, b) {
                charge += node.accrue(alg, child_slot(hi), child_slot(hi), 1, Some(update));
            } else {
                node.flush_child(alg, hi);
                ctx.path.push(hi);
                charge += update_rec(
                    &mut node.children[hi],
                    a,
                    b,
                    update,
                    alg,
                    ctx,
                    stats,
                    depth + 1,
                );
                ctx.path.pop();
                node.refresh_child(alg, hi);
            }
        }
    }
    node.accesses += charge;
    charge
}

impl<A: RangeAlgebra> RNode<A> {
    fn query_fvals(&mut self, alg: &A, slot_lo: usize, slot_hi: usize) -> A::Value {
        match &mut self.agg {
            Agg::Seg(s) => s.val.query(&ValueSpec(alg), slot_lo, slot_hi),
            Agg::Flat(f) => {
                let mut acc = alg.identity();
                for v in &f.fval[slot_lo..=slot_hi] {
                    acc = alg.combine(&acc, v);
                }
                acc
            }
        }
    }
}

fn audit_rnode<A: RangeAlgebra>(
    node: &RNode<A>,
    alg: &A,
    prev: &mut Option<Key>,
    aggregate: &mut A::Value,
) -> Result<(), String> {
    let k = node.keys.len();
    if k == 0 {
        return Err("node without keys".into());
    }
    if node.children.len() != k + 1 {
        return Err("child arity mismatch".into());
    }
    let mut sum = 0u64;
    let mut live = 0u64;
    let mut height = -1i32;
    for i in 0..=k {
        if let Some(child) = node.children[i].as_deref() {
            audit_rnode(child, alg, prev, aggregate)?;
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
            if !node.marked[i] {
                *aggregate = alg.combine(aggregate, &node.values[i]);
            }
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
        return Err("height mismatch".into());
    }
    Ok(())
}
