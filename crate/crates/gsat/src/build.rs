//! Ideal construction: prefix sums over the access counts, then repeated
//! binary-search splits so that every child subtree receives at most
//! m/(D(m)+1) of its parent's accesses.

use std::fmt;

use crate::interp::InterpolationIndex;
use crate::node::Entry;
use crate::policy::{DegreePolicy, Key, SearchKind, Weighting};

/// Rejected input to ideal construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuildError {
    UnsortedKeys { index: usize },
    KeyOutOfBounds { key: Key, lower: Key, upper: Key },
    ZeroAccessCount { key: Key },
    InvalidBounds { lower: Key, upper: Key },
}

impl fmt::Display for BuildError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildError::UnsortedKeys { index } => {
                write!(
                    f,
                    "keys must be strictly increasing (violated at index {index})"
                )
            }
            BuildError::KeyOutOfBounds { key, lower, upper } => {
                write!(f, "key {key} outside bounds [{lower}, {upper})")
            }
            BuildError::ZeroAccessCount { key } => {
                write!(
                    f,
                    "key {key} has access count 0; every key needs at least one access"
                )
            }
            BuildError::InvalidBounds { lower, upper } => {
                write!(f, "invalid bounds [{lower}, {upper})")
            }
        }
    }
}

impl std::error::Error for BuildError {}

/// Everything the construction derives for one node; the caller wraps it
/// into its concrete node type (and may read the already-built children).
pub(crate) struct RawNode<V, C> {
    pub keys: Vec<Key>,
    pub values: Vec<V>,
    pub key_accesses: Vec<u64>,
    pub marked: Vec<bool>,
    pub children: Vec<Option<Box<C>>>,
    pub accesses: u64,
    pub live: u64,
    pub lower: Key,
    pub upper: Key,
    pub height: u16,
    pub interp: Option<Box<InterpolationIndex>>,
}

pub(crate) fn validate_records<V>(
    entries: &[Entry<V>],
    lower: Key,
    upper: Key,
) -> Result<(), BuildError> {
    if lower >= upper {
        return Err(BuildError::InvalidBounds { lower, upper });
    }
    let mut prev: Option<Key> = None;
    for (i, e) in entries.iter().enumerate() {
        if let Some(p) = prev {
            if e.key <= p {
                return Err(BuildError::UnsortedKeys { index: i });
            }
        }
        if e.key < lower || e.key >= upper {
            return Err(BuildError::KeyOutOfBounds {
                key: e.key,
                lower,
                upper,
            });
        }
        if e.accesses == 0 {
            return Err(BuildError::ZeroAccessCount { key: e.key });
        }
        prev = Some(e.key);
    }
    Ok(())
}

/// Builds an ideal subtree over `entries` (strictly increasing keys inside
/// `[lower, upper)`). `assemble` turns each planned node into the caller's
/// node type, bottom-up. Returns the root, or `None` for empty input.
pub(crate) fn build_tree<V, C, F>(
    entries: Vec<Entry<V>>,
    lower: Key,
    upper: Key,
    policy: &DegreePolicy,
    nodes_built: &mut u64,
    assemble: &mut F,
) -> Option<Box<C>>
where
    F: FnMut(RawNode<V, C>) -> Box<C>,
{
    let n = entries.len();
    if n == 0 {
        return None;
    }
    let unit = policy.weighting == Weighting::UnitSize;
    let mut weight_prefix = Vec::with_capacity(n + 1);
    let mut live_prefix = Vec::with_capacity(n + 1);
    weight_prefix.push(0u64);
    live_prefix.push(0u64);
    for e in &entries {
        let w = if unit { 1 } else { e.accesses };
        weight_prefix.push(weight_prefix.last().unwrap() + w);
        live_prefix.push(live_prefix.last().unwrap() + u64::from(!e.marked));
    }
    let mut slots: Vec<Option<Entry<V>>> = entries.into_iter().map(Some).collect();
    let (root, _) = plan(
        &mut slots,
        &weight_prefix,
        &live_prefix,
        0,
        n,
        lower,
        upper,
        policy,
        nodes_built,
        assemble,
    );
    root
}

#[allow(clippy::too_many_arguments)]
fn plan<V, C, F>(
    slots: &mut [Option<Entry<V>>],
    weight_prefix: &[u64],
    live_prefix: &[u64],
    lo: usize,
    hi: usize,
    lower: Key,
    upper: Key,
    policy: &DegreePolicy,
    nodes_built: &mut u64,
    assemble: &mut F,
) -> (Option<Box<C>>, i32)
where
    F: FnMut(RawNode<V, C>) -> Box<C>,
{
    if lo >= hi {
        return (None, -1);
    }
    let accesses = weight_prefix[hi] - weight_prefix[lo];
    let degree = policy.degree.degree(accesses).max(1);
    // Split threshold, fixed once per node before any key is selected.
    let threshold = accesses.div_ceil(degree + 1).max(1);

    let cap = (degree.min((hi - lo) as u64)) as usize;
    let mut keys = Vec::with_capacity(cap);
    let mut values = Vec::with_capacity(cap);
    let mut key_accesses = Vec::with_capacity(cap);
    let mut marked = Vec::with_capacity(cap);
    let mut children = Vec::with_capacity(cap + 1);
    let mut max_child_height = -1i32;
    let mut cur_lo = lo;
    let mut cur_lower = lower;

    for _ in 0..degree {
        // Smallest t in (cur_lo, hi] whose weight prefix reaches the
        // threshold; falls back to hi when the remainder is light.
        let mut from = cur_lo;
        let mut to = hi;
        while to - from > 1 {
            let mid = (from + to) / 2;
            if weight_prefix[mid] - weight_prefix[cur_lo] < threshold {
                from = mid;
            } else {
                to = mid;
            }
        }
        let entry = slots[to - 1].take().expect("entry consumed once");
        let (child, child_height) = plan(
            slots,
            weight_prefix,
            live_prefix,
            cur_lo,
            to - 1,
            cur_lower,
            entry.key,
            policy,
            nodes_built,
            assemble,
        );
        max_child_height = max_child_height.max(child_height);
        keys.push(entry.key);
        values.push(entry.value);
        key_accesses.push(if unit_weights(policy) {
            1
        } else {
            entry.accesses
        });
        marked.push(entry.marked);
        children.push(child);
        cur_lower = entry.key + 1;
        cur_lo = to;
        if cur_lo == hi {
            break;
        }
    }
    let (last_child, last_height) = plan(
        slots,
        weight_prefix,
        live_prefix,
        cur_lo,
        hi,
        cur_lower,
        upper,
        policy,
        nodes_built,
        assemble,
    );
    max_child_height = max_child_height.max(last_height);
    children.push(last_child);

    let live = live_prefix[hi] - live_prefix[lo];
    let interp = (policy.search == SearchKind::Interpolation).then(|| {
        Box::new(InterpolationIndex::build(
            &keys,
            lower,
            upper,
            accesses,
            policy.alpha,
        ))
    });
    let height = (max_child_height + 1).max(0) as u16;
    *nodes_built += 1;
    let node = assemble(RawNode {
        keys,
        values,
        key_accesses,
        marked,
        children,
        accesses,
        live,
        lower,
        upper,
        height,
        interp,
    });
    (Some(node), height as i32)
}

fn unit_weights(policy: &DegreePolicy) -> bool {
    policy.weighting == Weighting::UnitSize
}
