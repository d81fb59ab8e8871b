//! Benchmark harness for the self-adjusting tree family: runs
//! (tree × workload) matrices over deterministic operation streams,
//! reports throughput with a relative-to-baseline column plus timing-free
//! work statistics, and evaluates declarative trend rules.

use std::fmt;

pub mod report;
pub mod runner;
pub mod trees;
pub mod trends;

pub use report::{to_csv, to_markdown, CSV_HEADER};
pub use runner::{run_matrix, BenchConfig, CellResult};
pub use trees::{make_tree, BenchTree, TreeParams, WorkSnapshot, TREE_NAMES};
pub use trends::{verify_trends, CellRef, Cmp, Metric, TrendFile, TrendOutcome, TrendRule};

#[derive(Debug)]
pub enum BenchError {
    UnknownTree(String),
    Workload(gsat_workloads::SpecError),
    Config(String),
    Io(std::io::Error),
}

impl fmt::Display for BenchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchError::UnknownTree(name) => write!(
                f,
                "unknown tree '{name}'; expected one of {}",
                TREE_NAMES.join(", ")
            ),
            BenchError::Workload(e) => write!(f, "workload error: {e}"),
            BenchError::Config(msg) => write!(f, "configuration error: {msg}"),
            BenchError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for BenchError {}

impl From<std::io::Error> for BenchError {
    fn from(e: std::io::Error) -> Self {
        BenchError::Io(e)
    }
}
