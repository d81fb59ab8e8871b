//! Value algebras for range aggregation and range updates.
//!
//! `combine` folds values in key order (a monoid), `Update` describes a
//! range action with composition, and `apply` pushes an update onto an
//! aggregate that covers `live` keys. Lazy propagation over aggregates is
//! only sound when `apply` distributes over `combine` in the size-aware
//! sense: apply(u, a ⊙ b, k₁+k₂) = apply(u, a, k₁) ⊙ apply(u, b, k₂).

pub trait RangeAlgebra {
    type Value: Clone + PartialEq + std::fmt::Debug;
    type Update: Clone;

    fn combine(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn identity(&self) -> Self::Value;

    fn no_update(&self) -> Self::Update;
    fn is_no_update(&self, u: &Self::Update) -> bool;
    /// `compose(outer, inner)` acts like `inner` first, then `outer`.
    fn compose(&self, outer: &Self::Update, inner: &Self::Update) -> Self::Update;
    /// Applies an update to an aggregate over `live` keys. Must satisfy
    /// `apply(u, identity, 0) == identity`.
    fn apply(&self, u: &Self::Update, agg: &Self::Value, live: u64) -> Self::Value;
}

/// Sum aggregate with additive range updates. Arithmetic wraps, so the
/// differential oracles stay exact even under adversarial inputs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SumAdd;

impl RangeAlgebra for SumAdd {
    type Value = i64;
    type Update = i64;

    fn combine(&self, a: &i64, b: &i64) -> i64 {
        a.wrapping_add(*b)
    }

    fn identity(&self) -> i64 {
        0
    }

    fn no_update(&self) -> i64 {
        0
    }

    fn is_no_update(&self, u: &i64) -> bool {
        *u == 0
    }

    fn compose(&self, outer: &i64, inner: &i64) -> i64 {
        outer.wrapping_add(*inner)
    }

    fn apply(&self, u: &i64, agg: &i64, live: u64) -> i64 {
        agg.wrapping_add(u.wrapping_mul(live as i64))
    }
}

/// Sum aggregate with assignment range updates (later assignment wins).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SumAssign;

impl RangeAlgebra for SumAssign {
    type Value = i64;
    type Update = Option<i64>;

    fn combine(&self, a: &i64, b: &i64) -> i64 {
        a.wrapping_add(*b)
    }

    fn identity(&self) -> i64 {
        0
    }

    fn no_update(&self) -> Option<i64> {
        None
    }

    fn is_no_update(&self, u: &Option<i64>) -> bool {
        u.is_none()
    }

    fn compose(&self, outer: &Option<i64>, inner: &Option<i64>) -> Option<i64> {
        outer.or(*inner)
    }

    fn apply(&self, u: &Option<i64>, agg: &i64, live: u64) -> i64 {
        match u {
            Some(c) => c.wrapping_mul(live as i64),
            None => *agg,
        }
    }
}

/// Harness-facing algebra selection by name. The update types differ per
/// algebra, so consumers match on this to instantiate the right tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgebraName {
    SumAdd,
    SumAssign,
    Min,
}

impl AlgebraName {
    pub const ALL: [AlgebraName; 3] = [
        AlgebraName::SumAdd,
        AlgebraName::SumAssign,
        AlgebraName::Min,
    ];
}

impl std::str::FromStr for AlgebraName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sum-add" => Ok(AlgebraName::SumAdd),
            "sum-assign" => Ok(AlgebraName::SumAssign),
            "min" => Ok(AlgebraName::Min),
            other => Err(format!(
                "unknown algebra: {other} (expected sum-add|sum-assign|min)"
            )),
        }
    }
}

impl std::fmt::Display for AlgebraName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AlgebraName::SumAdd => "sum-add",
            AlgebraName::SumAssign => "sum-assign",
            AlgebraName::Min => "min",
        })
    }
}

/// Minimum aggregate; read-only (the only update is the identity).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MinAlgebra;

impl RangeAlgebra for MinAlgebra {
    type Value = i64;
    type Update = ();

    fn combine(&self, a: &i64, b: &i64) -> i64 {
        (*a).min(*b)
    }

    fn identity(&self) -> i64 {
        i64::MAX
    }

    fn no_update(&self) {}

    fn is_no_update(&self, _: &()) -> bool {
        true
    }

    fn compose(&self, _: &(), _: &()) {}

    fn apply(&self, _: &(), agg: &i64, _: u64) -> i64 {
        *agg
    }
}
