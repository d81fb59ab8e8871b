//! Declarative trend rules over result cells: "metric of this cell must
//! compare thus against metric of that cell". The acceptance suite and the
//! CLI's `--trends` flag both evaluate rule files of this shape.

use serde::{Deserialize, Serialize};

use crate::runner::CellResult;
use crate::BenchError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    OpsPerSec,
    Relative,
    DepthMean,
    NodesPerOp,
    Rebuilds,
}

impl Metric {
    fn of(self, cell: &CellResult) -> f64 {
        match self {
            Metric::OpsPerSec => cell.ops_per_sec,
            Metric::Relative => cell.relative,
            Metric::DepthMean => cell.depth_mean,
            Metric::NodesPerOp => cell.nodes_per_op,
            Metric::Rebuilds => cell.rebuilds,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cmp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Cmp {
    fn eval(self, l: f64, r: f64) -> bool {
        match self {
            Cmp::Lt => l < r,
            Cmp::Le => l <= r,
            Cmp::Gt => l > r,
            Cmp::Ge => l >= r,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellRef {
    pub tree: String,
    pub workload: String,
    /// Restricts the match when results from several mixes are combined.
    #[serde(default)]
    pub mix: Option<String>,
}

impl CellRef {
    fn find<'a>(&self, results: &'a [CellResult]) -> Result<&'a CellResult, BenchError> {
        results
            .iter()
            .find(|r| {
                r.tree == self.tree
                    && r.workload == self.workload
                    && self.mix.as_ref().is_none_or(|m| *m == r.mix)
            })
            .ok_or_else(|| {
                BenchError::Config(format!(
                    "trend rule references missing cell: tree={} workload={} mix={:?}",
                    self.tree, self.workload, self.mix
                ))
            })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrendRule {
    pub name: String,
    pub metric: Metric,
    pub left: CellRef,
    pub cmp: Cmp,
    pub right: CellRef,
}

#[derive(Clone, Debug)]
pub struct TrendOutcome {
    pub name: String,
    pub pass: bool,
    pub left_value: f64,
    pub right_value: f64,
    pub description: String,
}

pub fn verify_trends(
    results: &[CellResult],
    rules: &[TrendRule],
) -> Result<Vec<TrendOutcome>, BenchError> {
    rules
        .iter()
        .map(|rule| {
            let left = rule.left.find(results)?;
            let right = rule.right.find(results)?;
            let (l, r) = (rule.metric.of(left), rule.metric.of(right));
            Ok(TrendOutcome {
                name: rule.name.clone(),
                pass: rule.cmp.eval(l, r),
                left_value: l,
                right_value: r,
                description: format!(
                    "{:?}({},{}) {} {:?}({},{})  [{l:.4} vs {r:.4}]",
                    rule.metric,
                    rule.left.tree,
                    rule.left.workload,
                    rule.cmp.symbol(),
                    rule.metric,
                    rule.right.tree,
                    rule.right.workload,
                ),
            })
        })
        .collect()
}

#[derive(Deserialize)]
pub struct TrendFile {
    pub rules: Vec<TrendRule>,
}
