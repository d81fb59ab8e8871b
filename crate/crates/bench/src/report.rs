//! Result emission: a fixed-schema CSV for machines, and a markdown table
//! per mix (trees as rows, workloads as columns, relative throughput in
//! the cells) for humans.

use std::fmt::Write as _;

use crate::runner::CellResult;

pub const CSV_HEADER: &str =
    "tree,workload,mix,keys,ops_per_sec,relative,depth_mean,nodes_per_op,rebuilds";

pub fn to_csv(results: &[CellResult]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in results {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.2},{:.4},{:.4},{:.4},{:.1}",
            r.tree,
            r.workload,
            r.mix,
            r.keys,
            r.ops_per_sec,
            r.relative,
            r.depth_mean,
            r.nodes_per_op,
            r.rebuilds
        );
    }
    out
}

pub fn to_markdown(results: &[CellResult]) -> String {
    let mut out = String::new();
    let mut mixes: Vec<&str> = results.iter().map(|r| r.mix.as_str()).collect();
    mixes.dedup();
    mixes.sort_unstable();
    mixes.dedup();
    for mix in mixes {
        let rows: Vec<&CellResult> = results.iter().filter(|r| r.mix == mix).collect();
        let mut workloads: Vec<&str> = Vec::new();
        let mut trees: Vec<&str> = Vec::new();
        for r in &rows {
            if !workloads.contains(&r.workload.as_str()) {
                workloads.push(&r.workload);
            }
            if !trees.contains(&r.tree.as_str()) {
                trees.push(&r.tree);
            }
        }
        let keys = rows.first().map_or(0, |r| r.keys);
        let _ = writeln!(out, "### {mix} workloads, |S| = {keys}\n");
        let _ = write!(out, "| tree |");
        for w in &workloads {
            let _ = write!(out, " {w} |");
        }
        out.push('\n');
        let _ = write!(out, "|---|");
        for _ in &workloads {
            let _ = write!(out, "---|");
        }
        out.push('\n');
        for tree in &trees {
            let _ = write!(out, "| {tree} |");
            for w in &workloads {
                match rows.iter().find(|r| &r.tree == tree && &r.workload == w) {
                    Some(r) if r.relative == 1.0 => {
                        let _ = write!(out, " {:.2e} ops/s |", r.ops_per_sec);
                    }
                    Some(r) => {
                        let _ = write!(out, " x{:.2} |", r.relative);
                    }
                    None => {
                        let _ = write!(out, " — |");
                    }
                }
            }
            out.push('\n');
        }
        out.push('\n');
        let _ = writeln!(out, "nodes visited per op (timing-free):\n");
        let _ = write!(out, "| tree |");
        for w in &workloads {
            let _ = write!(out, " {w} |");
        }
        out.push('\n');
        let _ = write!(out, "|---|");
        for _ in &workloads {
            let _ = write!(out, "---|");
        }
        out.push('\n');
        for tree in &trees {
            let _ = write!(out, "| {tree} |");
            for w in &workloads {
                match rows.iter().find(|r| &r.tree == tree && &r.workload == w) {
                    Some(r) => {
                        let _ = write!(out, " {:.2} |", r.nodes_per_op);
                    }
                    None => {
                        let _ = write!(out, " — |");
                    }
                }
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}
