//! Self-adjusting multiway search trees driven by access counts.
//!
//! A node's width is a function D(m) of the number of accesses m to its
//! subtree — not of its size — so frequently requested keys float toward
//! the root as subtrees are lazily rebuilt into ideal shape. The crate
//! ships four parameterizations behind one engine:
//!
//! * `sait` — D(m) = ⌈√m⌉ with per-node interpolation hint tables,
//! * `sabt` — D(m) = B for a fixed branching constant,
//! * `salt` — D(m) = ⌈log₂ m⌉,
//! * `sa2t` — the binary special case (B = 2),
//!
//! plus size-weighted adapters that turn the same machinery into the
//! classic interpolation-search-tree and lazy B-Tree baselines, a
//! range-query extension with per-node lazy segment trees, and classic
//! B-Tree / splay-tree baselines for benchmarking.
//!
//! Deletes are tombstones: a deleted key stays physically present (still
//! counting accesses) until the subtree around it is rebuilt. In
//! lazy-delete mode even rebuilds keep tombstoned keys, so a later
//! re-insert restores their full access history.
//!
//! Trees are single-writer: operations take `&mut self`, and instances
//! may move between threads but not be shared mutably.

mod build;
mod interp;
mod node;
mod policy;
mod search;
mod stats;
mod tree;

pub mod baselines;
pub mod range;

pub use build::BuildError;
pub use interp::InterpolationIndex;
pub use node::{KeyRecord, NodeView};
pub use policy::{DegreeFn, DegreePolicy, DeleteMode, Key, SearchKind, Weighting};
pub use search::{binary_slot, insertion_point, SlotRef};
pub use stats::Stats;
pub use tree::Gsat;
