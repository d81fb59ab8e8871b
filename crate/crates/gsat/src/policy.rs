//! Degree policies: how wide a node may be, how keys are located inside a
//! node, and whether the tree is weighted by accesses or by key count.

/// Key type used throughout the crate. Keys are plain signed 64-bit
/// integers; `i64::MAX` is reserved because subtree bounds are half-open.
pub type Key = i64;

/// Degree function: the maximum number of keys a node may hold, as a
/// function of the total number of accesses `m` to its subtree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DegreeFn {
    /// ⌈√m⌉ keys per node.
    Sqrt,
    /// A fixed branching constant.
    Fixed(u32),
    /// max(1, ⌈log₂ m⌉) keys per node.
    Log2,
}

impl DegreeFn {
    /// Evaluates the degree for a subtree with `m` total accesses (`m ≥ 1`).
    /// Always returns at least 1.
    pub fn degree(self, m: u64) -> u64 {
        debug_assert!(m >= 1);
        match self {
            DegreeFn::Sqrt => ceil_sqrt(m),
            DegreeFn::Fixed(b) => u64::from(b),
            DegreeFn::Log2 => ceil_log2(m).max(1),
        }
    }
}

pub(crate) fn ceil_sqrt(m: u64) -> u64 {
    let r = m.isqrt();
    if r * r < m {
        r + 1
    } else {
        r.max(1)
    }
}

pub(crate) fn ceil_log2(m: u64) -> u64 {
    if m <= 1 {
        0
    } else {
        let floor = m.ilog2() as u64;
        if m.is_power_of_two() {
            floor
        } else {
            floor + 1
        }
    }
}

/// In-node search strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchKind {
    /// Binary search over the node's keys.
    Binary,
    /// Interpolation hint table, then exponential search, then binary search.
    /// Hint tables are rebuilt only when a subtree is rebuilt.
    Interpolation,
}

/// Whether tree shape follows accumulated access counts or plain key count.
///
/// `UnitSize` freezes every key's weight at 1: lookups do not accumulate
/// accesses and node counters track structural operations only. This turns
/// the same machinery into the classic size-balanced variants used as
/// baselines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weighting {
    AccessCounts,
    UnitSize,
}

/// What happens to tombstoned keys when their subtree is rebuilt.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeleteMode {
    /// Rebuilds drop marked keys together with their accumulated accesses.
    Standard,
    /// Rebuilds keep marked keys physically present, so a later re-insert
    /// recovers the full access history.
    LazyDelete,
}

/// A complete node policy: degree function, in-node search strategy,
/// weighting mode, and the interpolation exponent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DegreePolicy {
    pub degree: DegreeFn,
    pub search: SearchKind,
    pub weighting: Weighting,
    /// Exponent for the interpolation hint table size ⌈m^alpha⌉.
    /// Must lie in [1/2, 1). Ignored for binary-search policies.
    pub alpha: f64,
}

impl DegreePolicy {
    /// ⌈√m⌉-degree tree with interpolation search.
    pub fn sait(alpha: f64) -> Self {
        assert!(
            (0.5..1.0).contains(&alpha),
            "interpolation exponent must lie in [1/2, 1), got {alpha}"
        );
        DegreePolicy {
            degree: DegreeFn::Sqrt,
            search: SearchKind::Interpolation,
            weighting: Weighting::AccessCounts,
            alpha,
        }
    }

    /// Fixed-degree tree with binary search, `b ≥ 2`.
    pub fn sabt(b: u32) -> Self {
        assert!(b >= 2, "branching constant must be at least 2, got {b}");
        DegreePolicy {
            degree: DegreeFn::Fixed(b),
            search: SearchKind::Binary,
            weighting: Weighting::AccessCounts,
            alpha: 0.5,
        }
    }

    /// ⌈log₂ m⌉-degree tree with binary search.
    pub fn salt() -> Self {
        DegreePolicy {
            degree: DegreeFn::Log2,
            search: SearchKind::Binary,
            weighting: Weighting::AccessCounts,
            alpha: 0.5,
        }
    }

    /// Degree-2 tree; the self-adjusting binary variant.
    pub fn sa2t() -> Self {
        Self::sabt(2)
    }

    /// Turns any policy into its size-weighted counterpart: every key
    /// weighs 1 regardless of how often it is accessed.
    pub fn size_weighted(mut self) -> Self {
        self.weighting = Weighting::UnitSize;
        self
    }

    /// Classic interpolation-search-tree baseline: √n degree, unit weights.
    pub fn ist_baseline(alpha: f64) -> Self {
        Self::sait(alpha).size_weighted()
    }

    /// Lazily rebuilt B-Tree baseline: fixed degree, unit weights.
    pub fn lazy_btree_baseline(b: u32) -> Self {
        Self::sabt(b).size_weighted()
    }

    pub(crate) fn counts_accesses(&self) -> bool {
        self.weighting == Weighting::AccessCounts
    }
}
