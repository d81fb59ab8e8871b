use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use gsat_bench::{
    run_matrix, to_csv, to_markdown, verify_trends, BenchConfig, TreeParams, TrendFile,
};

/// Throughput benchmark for self-adjusting search trees.
///
/// Runs every requested tree against every requested workload, averaging
/// over repetitions, and emits a table with throughput relative to the
/// baseline tree plus timing-free work statistics (mean search depth,
/// nodes visited per operation, rebuild counts).
#[derive(Parser, Debug)]
#[command(name = "bench", version, about)]
struct Cli {
    /// Tree to benchmark (repeatable): sait, sabt, salt, sa2t,
    /// ist-baseline, lazy-btree-baseline, btree, splay.
    #[arg(long = "tree")]
    trees: Vec<String>,

    /// Workload distribution (repeatable): uniform | xy:X/Y | zipf:S.
    #[arg(long = "workload")]
    workloads: Vec<String>,

    /// Key-universe size |S|; trees are pre-populated with all keys.
    #[arg(long, default_value_t = 100_000)]
    keys: u64,

    /// Measured operations per cell (deterministic mode).
    #[arg(long, default_value_t = 1_000_000)]
    ops: u64,

    /// Measure for a wall-clock window (seconds) instead of an op count.
    #[arg(long)]
    duration: Option<f64>,

    /// Repetitions per cell; the table shows the average.
    #[arg(long, default_value_t = 5)]
    reps: u32,

    /// Warmup operations as a multiple of --keys.
    #[arg(long, default_value_t = 10)]
    warmup: u64,

    /// Master seed; fixes every operation stream.
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Keep tombstoned keys (and their access history) across rebuilds.
    #[arg(long)]
    lazy_delete: bool,

    /// Operation mix: read-only | mixed (10% insert / 10% delete / 80% get).
    #[arg(long, default_value = "read-only")]
    mix: String,

    /// Baseline tree for the relative-throughput column.
    #[arg(long, default_value = "splay")]
    baseline: String,

    /// Interpolation exponent for sait / ist-baseline.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,

    /// Branching constant for sabt.
    #[arg(long, default_value_t = 16)]
    b: u32,

    /// Occupancy constant for btree and lazy-btree-baseline.
    #[arg(long, default_value_t = 8)]
    btree_b: u32,

    /// JSON configuration file mirroring all flags; overrides them.
    #[arg(long)]
    config: Option<PathBuf>,

    /// JSON trend-rule file to evaluate against the results.
    #[arg(long)]
    trends: Option<PathBuf>,

    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

fn build_config(cli: &Cli) -> Result<BenchConfig, String> {
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        return serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()));
    }
    if cli.trees.is_empty() {
        return Err("no trees requested; pass --tree at least once".into());
    }
    if cli.workloads.is_empty() {
        return Err("no workloads requested; pass --workload at least once".into());
    }
    Ok(BenchConfig {
        trees: cli.trees.clone(),
        workloads: cli.workloads.clone(),
        keys: cli.keys,
        ops: cli.ops,
        duration_secs: cli.duration,
        reps: cli.reps,
        warmup_factor: cli.warmup,
        seed: cli.seed,
        lazy_delete: cli.lazy_delete,
        mix: cli.mix.clone(),
        baseline: cli.baseline.clone(),
        params: TreeParams {
            alpha: cli.alpha,
            sabt_b: cli.b,
            btree_b: cli.btree_b,
        },
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let results = match run_matrix(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let rendered = match cli.format {
        Format::Csv => to_csv(&results),
        Format::Markdown => to_markdown(&results),
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(path, rendered) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{rendered}"),
    }

    if let Some(path) = &cli.trends {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        };
        let file: TrendFile = match serde_json::from_str(&text) {
            Ok(f) => f,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        };
        let outcomes = match verify_trends(&results, &file.rules) {
            Ok(o) => o,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        };
        let mut all_pass = true;
        for o in &outcomes {
            eprintln!(
                "trend {}: {} — {}",
                o.name,
                if o.pass { "PASS" } else { "FAIL" },
                o.description
            );
            all_pass &= o.pass;
        }
        if !all_pass {
            return ExitCode::from(1);
        }
    }
    ExitCode::SUCCESS
}
