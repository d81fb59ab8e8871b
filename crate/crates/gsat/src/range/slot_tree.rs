//! Per-node segment trees with lazy propagation over the interleaved slot
//! array [child₀, key₀, child₁, key₁, …, key_{k−1}, child_k].
//!
//! Aggregates at internal positions are always current; a pending tag at a
//! position means its *descendants* have not absorbed the update yet. Leaf
//! tags double as the per-slot pending registers: whatever accumulates on a
//! child-slot leaf is exactly what must be forwarded to that child subtree,
//! and whatever accumulates on a key-slot leaf is what must be materialized
//! onto the node's own key before it is read or written.

use crate::range::algebra::RangeAlgebra;

/// Shared shape of the count tree and the value tree.
pub(crate) trait SlotSpec {
    type S: Clone;
    type U: Clone;
    fn op(&self, a: &Self::S, b: &Self::S) -> Self::S;
    fn id(&self) -> Self::S;
    /// Applies a tag to an aggregate over `live` live keys.
    fn apply(&self, u: &Self::U, s: &Self::S, live: u64) -> Self::S;
    fn compose(&self, outer: &Self::U, inner: &Self::U) -> Self::U;
    fn no_op(&self) -> Self::U;
    fn is_no_op(&self, u: &Self::U) -> bool;
}

/// Access-count sums; a tag adds its amount once per live key.
pub(crate) struct CountSpec;

impl SlotSpec for CountSpec {
    type S = u64;
    type U = u64;

    fn op(&self, a: &u64, b: &u64) -> u64 {
        a + b
    }

    fn id(&self) -> u64 {
        0
    }

    fn apply(&self, u: &u64, s: &u64, live: u64) -> u64 {
        s + u * live
    }

    fn compose(&self, outer: &u64, inner: &u64) -> u64 {
        outer + inner
    }

    fn no_op(&self) -> u64 {
        0
    }

    fn is_no_op(&self, u: &u64) -> bool {
        *u == 0
    }
}

/// Value aggregates under the tree's algebra.
pub(crate) struct ValueSpec<'a, A>(pub &'a A);

impl<A: RangeAlgebra> SlotSpec for ValueSpec<'_, A> {
    type S = A::Value;
    type U = A::Update;

    fn op(&self, a: &A::Value, b: &A::Value) -> A::Value {
        self.0.combine(a, b)
    }

    fn id(&self) -> A::Value {
        self.0.identity()
    }

    fn apply(&self, u: &A::Update, s: &A::Value, live: u64) -> A::Value {
        self.0.apply(u, s, live)
    }

    fn compose(&self, outer: &A::Update, inner: &A::Update) -> A::Update {
        self.0.compose(outer, inner)
    }

    fn no_op(&self) -> A::Update {
        self.0.no_update()
    }

    fn is_no_op(&self, u: &A::Update) -> bool {
        self.0.is_no_update(u)
    }
}

pub(crate) struct LazySlotTree<S, U> {
    slots: usize,
    base: usize,
    val: Vec<S>,
    live: Vec<u64>,
    tag: Vec<U>,
}

impl<S: Clone, U: Clone> LazySlotTree<S, U> {
    pub fn new<Sp>(spec: &Sp, leaves: Vec<(S, u64)>) -> Self
    where
        Sp: SlotSpec<S = S, U = U>,
    {
        let slots = leaves.len();
        assert!(slots >= 1);
        let base = slots.next_power_of_two();
        let mut val = Vec::with_capacity(2 * base);
        let mut live = vec![0u64; 2 * base];
        val.resize_with(base, || spec.id());
        for (i, (s, l)) in leaves.into_iter().enumerate() {
            live[base + i] = l;
            val.push(s);
        }
        val.resize_with(2 * base, || spec.id());
        for v in (1..base).rev() {
            val[v] = spec.op(&val[2 * v], &val[2 * v + 1]);
            live[v] = live[2 * v] + live[2 * v + 1];
        }
        let mut tag = Vec::with_capacity(2 * base);
        tag.resize_with(2 * base, || spec.no_op());
        LazySlotTree {
            slots,
            base,
            val,
            live,
            tag,
        }
    }

    /// Allocated positions, for memory accounting.
    pub fn cells(&self) -> usize {
        2 * self.base
    }

    pub fn total(&self) -> &S {
        &self.val[1]
    }

    #[cfg(test)]
    pub fn total_live(&self) -> u64 {
        self.live[1]
    }

    fn tag_position<Sp>(&mut self, spec: &Sp, v: usize, u: &U)
    where
        Sp: SlotSpec<S = S, U = U>,
    {
        self.val[v] = spec.apply(u, &self.val[v], self.live[v]);
        self.tag[v] = spec.compose(u, &self.tag[v]);
    }

    fn push<Sp>(&mut self, spec: &Sp, v: usize)
    where
        Sp: SlotSpec<S = S, U = U>,
    {
        if !spec.is_no_op(&self.tag[v]) {
            let u = std::mem::replace(&mut self.tag[v], spec.no_op());
            self.tag_position(spec, 2 * v, &u);
            self.tag_position(spec, 2 * v + 1, &u);
        }
    }

    /// Lazily applies `u` to every slot in `lo..=hi`.
    pub fn apply_range<Sp>(&mut self, spec: &Sp, lo: usize, hi: usize, u: &U)
    where
        Sp: SlotSpec<S = S, U = U>,
    {
        debug_assert!(lo <= hi && hi < self.slots);
        self.apply_rec(spec, 1, 0, self.base - 1, lo, hi, u);
    }

    #[allow(clippy::too_many_arguments)]
    fn apply_rec<Sp>(
        &mut self,
        spec: &Sp,
        v: usize,
        node_lo: usize,
        node_hi: usize,
        lo: usize,
        hi: usize,
        u: &U,
    ) where
        Sp: SlotSpec<S = S, U = U>,
    {
        if hi < node_lo || node_hi < lo {
            return;
        }
        if lo <= node_lo && node_hi <= hi {
            self.tag_position(spec, v, u);
            return;
        }
        self.push(spec, v);
        let mid = (node_lo + node_hi) / 2;
        self.apply_rec(spec, 2 * v, node_lo, mid, lo, hi, u);
        self.apply_rec(spec, 2 * v + 1, mid + 1, node_hi, lo, hi, u);
        self.val[v] = spec.op(&self.val[2 * v], &self.val[2 * v + 1]);
    }

    /// Folds the aggregate over `lo..=hi` in slot order.
    pub fn query<Sp>(&mut self, spec: &Sp, lo: usize, hi: usize) -> S
    where
        Sp: SlotSpec<S = S, U = U>,
    {
        debug_assert!(lo <= hi && hi < self.slots);
        self.query_rec(spec, 1, 0, self.base - 1, lo, hi)
    }

    fn query_rec<Sp>(
        &mut self,
        spec: &Sp,
        v: usize,
        node_lo: usize,
        node_hi: usize,
        lo: usize,
        hi: usize,
    ) -> S
    where
        Sp: SlotSpec<S = S, U = U>,
    {
        if hi < node_lo || node_hi < lo {
            return spec.id();
        }
        if lo <= node_lo && node_hi <= hi {
            return self.val[v].clone();
        }
        self.push(spec, v);
        let mid = (node_lo + node_hi) / 2;
        let left = self.query_rec(spec, 2 * v, node_lo, mid, lo, hi);
        let right = self.query_rec(spec, 2 * v + 1, mid + 1, node_hi, lo, hi);
        spec.op(&left, &right)
    }

    /// Live keys under `lo..=hi`; tags never change live weights, so this
    /// reads without pushing.
    pub fn live_in(&self, lo: usize, hi: usize) -> u64 {
        debug_assert!(lo <= hi && hi < self.slots);
        self.live_rec(1, 0, self.base - 1, lo, hi)
    }

    fn live_rec(&self, v: usize, node_lo: usize, node_hi: usize, lo: usize, hi: usize) -> u64 {
        if hi < node_lo || node_hi < lo {
            return 0;
        }
        if lo <= node_lo && node_hi <= hi {
            return self.live[v];
        }
        let mid = (node_lo + node_hi) / 2;
        self.live_rec(2 * v, node_lo, mid, lo, hi)
            + self.live_rec(2 * v + 1, mid + 1, node_hi, lo, hi)
    }

    /// Drives every tag on the path down to slot `i` and takes the pending
    /// register accumulated there.
    pub fn flush_slot<Sp>(&mut self, spec: &Sp, i: usize) -> U
    where
        Sp: SlotSpec<S = S, U = U>,
    {
        debug_assert!(i < self.slots);
        let leaf = self.base + i;
        let levels = self.base.trailing_zeros();
        for level in (1..=levels).rev() {
            self.push(spec, leaf >> level);
        }
        std::mem::replace(&mut self.tag[leaf], spec.no_op())
    }

    /// Overwrites slot `i` with externally materialized state. The slot's
    /// pending register must have been taken first.
    pub fn set_slot<Sp>(&mut self, spec: &Sp, i: usize, s: S, live: u64)
    where
        Sp: SlotSpec<S = S, U = U>,
    {
        debug_assert!(i < self.slots);
        let leaf = self.base + i;
        let levels = self.base.trailing_zeros();
        for level in (1..=levels).rev() {
            self.push(spec, leaf >> level);
        }
        debug_assert!(
            spec.is_no_op(&self.tag[leaf]),
            "set_slot over a pending register"
        );
        self.val[leaf] = s;
        self.live[leaf] = live;
        let mut v = leaf / 2;
        while v >= 1 {
            self.val[v] = spec.op(&self.val[2 * v], &self.val[2 * v + 1]);
            self.live[v] = self.live[2 * v] + self.live[2 * v + 1];
            if v == 1 {
                break;
            }
            v /= 2;
        }
    }
}
