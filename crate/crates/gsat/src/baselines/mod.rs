//! Non-self-adjusting comparison structures for the benchmark harness.

mod btree;
mod splay;

pub use btree::ClassicBTree;
pub use splay::SplayTree;
