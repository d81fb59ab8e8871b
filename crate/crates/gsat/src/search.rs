//! In-node slot location shared by every tree variant.

use crate::policy::Key;

/// Where a key lands inside one node: either it equals the node key at the
/// given index, or it belongs to the child subtree at the given slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotRef {
    Key(usize),
    Child(usize),
}

/// Number of node keys strictly less than `key`.
#[inline]
pub fn insertion_point(keys: &[Key], key: Key) -> usize {
    keys.partition_point(|&k| k < key)
}

/// Resolves an insertion point to a slot.
#[inline]
pub fn slot_at(keys: &[Key], point: usize, key: Key) -> SlotRef {
    if point < keys.len() && keys[point] == key {
        SlotRef::Key(point)
    } else {
        SlotRef::Child(point)
    }
}

/// Binary-search slot location.
#[inline]
pub fn binary_slot(keys: &[Key], key: Key) -> SlotRef {
    slot_at(keys, insertion_point(keys, key), key)
}
