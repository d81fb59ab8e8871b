//! Node layout for the point-operation tree.

use crate::interp::InterpolationIndex;
use crate::policy::{DegreePolicy, Key, SearchKind};
use crate::search::{slot_at, SlotRef};

/// One key with its payload and accumulated access count, as produced by
/// flattening a subtree or consumed by ideal construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyRecord<V> {
    pub key: Key,
    pub value: V,
    pub accesses: u64,
}

/// Internal flattened entry; keeps the tombstone flag so lazy-delete
/// rebuilds can preserve marked keys.
#[derive(Clone, Debug)]
pub(crate) struct Entry<V> {
    pub key: Key,
    pub value: V,
    pub accesses: u64,
    pub marked: bool,
}

pub(crate) type Slot<V> = Option<Box<Node<V>>>;

pub(crate) struct Node<V> {
    pub keys: Vec<Key>,
    pub values: Vec<V>,
    /// Per-key access counts, aligned with `keys`.
    pub key_accesses: Vec<u64>,
    pub marked: Vec<bool>,
    /// Always `keys.len() + 1` slots.
    pub children: Vec<Slot<V>>,
    /// Total accesses to every key in this subtree (marked keys included).
    pub accesses: u64,
    /// Value of `accesses` when this subtree was last rebuilt.
    pub accesses_at_rebuild: u64,
    /// Operations routed through this node since its last rebuild. The
    /// subtree is rebuilt once `counter * 4 > accesses_at_rebuild`.
    pub counter: u64,
    /// Unmarked keys in this subtree.
    pub live: u64,
    /// Half-open key-space interval this subtree was built over.
    pub lower: Key,
    pub upper: Key,
    /// Longest downward path (in edges) from this node.
    pub height: u16,
    pub interp: Option<Box<InterpolationIndex>>,
}

impl<V> Node<V> {
    /// Fresh single-key leaf, as linked by an insert miss.
    pub fn leaf(key: Key, value: V, lower: Key, upper: Key) -> Box<Self> {
        Box::new(Node {
            keys: vec![key],
            values: vec![value],
            key_accesses: vec![1],
            marked: vec![false],
            children: vec![None, None],
            accesses: 1,
            accesses_at_rebuild: 1,
            counter: 0,
            live: 1,
            lower,
            upper,
            height: 0,
            interp: None,
        })
    }

    /// Locates `key` inside this node, honoring the policy's search
    /// strategy. Out-of-bounds keys are routed by comparison alone.
    #[inline]
    pub fn slot_for(&self, key: Key, policy: &DegreePolicy) -> SlotRef {
        let point = match (policy.search, &self.interp) {
            (SearchKind::Interpolation, Some(idx)) => idx.lookup(&self.keys, key),
            _ => crate::search::insertion_point(&self.keys, key),
        };
        slot_at(&self.keys, point, key)
    }

    /// Key-space interval owned by child slot `i`, half-open.
    #[inline]
    pub fn child_bounds(&self, i: usize) -> (Key, Key) {
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

    pub fn child_height(slot: &Slot<V>) -> i32 {
        slot.as_ref().map_or(-1, |n| n.height as i32)
    }

    /// Exact height recomputation from the children.
    pub fn recompute_height(&mut self) {
        let below = self
            .children
            .iter()
            .map(Self::child_height)
            .max()
            .unwrap_or(-1);
        self.height = (below + 1).max(0) as u16;
    }

    /// Height maintenance after the child in slot `i` changed from
    /// `old_child_height` (−1 for an empty slot). Only rescans the node
    /// when the previous maximum may have shrunk.
    pub fn update_height_after_child(&mut self, i: usize, old_child_height: i32) {
        let new_h = Self::child_height(&self.children[i]);
        if new_h > old_child_height {
            if new_h + 1 > self.height as i32 {
                self.height = (new_h + 1) as u16;
            }
        } else if new_h < old_child_height && old_child_height + 1 == self.height as i32 {
            self.recompute_height();
        }
    }

    /// Moves the subtree's contents into `out` in key order.
    pub fn into_entries(self, keep_marked: bool, out: &mut Vec<Entry<V>>) {
        let Node {
            keys,
            values,
            key_accesses,
            marked,
            children,
            ..
        } = self;
        let mut children = children.into_iter();
        let mut take_child = |out: &mut Vec<Entry<V>>| {
            if let Some(child) = children.next().flatten() {
                child.into_entries(keep_marked, out);
            }
        };
        let mut values = values.into_iter();
        for i in 0..keys.len() {
            take_child(out);
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
        take_child(out);
    }

    /// Clones the subtree's contents into `out` in key order.
    pub fn collect_records(&self, include_marked: bool, out: &mut Vec<KeyRecord<V>>)
    where
        V: Clone,
    {
        for i in 0..self.keys.len() {
            if let Some(child) = &self.children[i] {
                child.collect_records(include_marked, out);
            }
            if include_marked || !self.marked[i] {
                out.push(KeyRecord {
                    key: self.keys[i],
                    value: self.values[i].clone(),
                    accesses: self.key_accesses[i],
                });
            }
        }
        if let Some(child) = &self.children[self.keys.len()] {
            child.collect_records(include_marked, out);
        }
    }
}

/// Read-only view of one node, for tests and instrumentation.
pub struct NodeView<'a, V> {
    pub(crate) node: &'a Node<V>,
}

impl<'a, V> NodeView<'a, V> {
    pub fn keys(&self) -> &'a [Key] {
        &self.node.keys
    }

    pub fn key_accesses(&self) -> &'a [u64] {
        &self.node.key_accesses
    }

    pub fn marked(&self) -> &'a [bool] {
        &self.node.marked
    }

    pub fn values(&self) -> &'a [V] {
        &self.node.values
    }

    pub fn child_count(&self) -> usize {
        self.node.children.len()
    }

    pub fn child(&self, i: usize) -> Option<NodeView<'a, V>> {
        self.node.children[i]
            .as_deref()
            .map(|node| NodeView { node })
    }

    pub fn bounds(&self) -> (Key, Key) {
        (self.node.lower, self.node.upper)
    }

    pub fn accesses(&self) -> u64 {
        self.node.accesses
    }

    pub fn accesses_at_rebuild(&self) -> u64 {
        self.node.accesses_at_rebuild
    }

    pub fn counter(&self) -> u64 {
        self.node.counter
    }

    pub fn height(&self) -> usize {
        self.node.height as usize
    }

    pub fn hint_table_len(&self) -> usize {
        self.node.interp.as_ref().map_or(0, |idx| idx.len())
    }
}
