//! Benchmark harness: timing grids, anchor-count and radix-width sweeps,
//! and power-law fits of time against input size.

use std::fmt::Write as _;
use std::time::Duration;

use cellgraph::scene::clustered_vectors;
use cellgraph::{
    random_vector_multiset, AlgorithmParams, Counters, EdgeAlgorithm, ParallelConfig, Registry,
    VectorSet,
};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchMode {
    /// Every requested algorithm at every size.
    Compare,
    /// Heuristic with `h = 0..=8`.
    AnchorSweep,
    /// Tree with `r` in {1, 2, 4, 8, 16}.
    RadixSweep,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InputKind {
    Random {
        duplicate_fraction: f64,
    },
    /// Vectors within `max_flips` flips of one of `centers` random centers.
    Clustered {
        centers: usize,
        max_flips: usize,
    },
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub ell: usize,
    pub algos: Vec<String>,
    pub params: AlgorithmParams,
    pub reps: usize,
    pub seed: u64,
    pub mode: BenchMode,
    pub input: InputKind,
    pub parallel: ParallelConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![4096, 8192, 16384],
            ell: 256,
            algos: vec!["naive".into(), "heuristic".into(), "tree".into()],
            params: AlgorithmParams::default(),
            reps: 3,
            seed: 1,
            mode: BenchMode::Compare,
            input: InputKind::Random {
                duplicate_fraction: 0.0,
            },
            parallel: ParallelConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchRow {
    pub n: usize,
    pub ell: usize,
    pub label: String,
    pub n_unique: usize,
    pub edges: usize,
    pub median_total: Duration,
    /// Median duration of each stage, in pipeline order.
    pub stages: Vec<(&'static str, Duration)>,
    pub counters: Counters,
}

fn median(mut xs: Vec<Duration>) -> Duration {
    xs.sort();
    xs[xs.len() / 2]
}

pub fn bench_input(cfg: &BenchConfig, n: usize) -> Result<VectorSet> {
    let seed = cfg.seed ^ (n as u64).rotate_left(32);
    Ok(match cfg.input {
        InputKind::Random { duplicate_fraction } => {
            random_vector_multiset(n, cfg.ell, duplicate_fraction, seed)?
        }
        InputKind::Clustered { centers, max_flips } => {
            clustered_vectors(n, cfg.ell, centers, max_flips, seed)?
        }
    })
}

fn strategies(cfg: &BenchConfig) -> Result<Vec<Box<dyn EdgeAlgorithm>>> {
    let reg = Registry::builtin();
    let make = |name: &str, params: AlgorithmParams| {
        reg.create(name, &params)
            .map_err(|e| CliError::Usage(e.to_string()))
    };
    match cfg.mode {
        BenchMode::Compare => cfg.algos.iter().map(|a| make(a, cfg.params)).collect(),
        BenchMode::AnchorSweep => (0..=8)
            .map(|h| {
                make(
                    "heuristic",
                    AlgorithmParams {
                        anchors: h,
                        ..cfg.params
                    },
                )
            })
            .collect(),
        BenchMode::RadixSweep => [1, 2, 4, 8, 16]
            .into_iter()
            .map(|r| {
                make(
                    "tree",
                    AlgorithmParams {
                        radix_bits: r,
                        ..cfg.params
                    },
                )
            })
            .collect(),
    }
}

/// Times one algorithm on one input, `reps` times.
pub fn measure(
    algo: &dyn EdgeAlgorithm,
    input: &VectorSet,
    reps: usize,
    parallel: &ParallelConfig,
) -> Result<BenchRow> {
    let reps = reps.max(1);
    let mut totals = Vec::with_capacity(reps);
    let mut per_stage: Vec<(&'static str, Vec<Duration>)> = Vec::new();
    let mut last = None;
    for _ in 0..reps {
        let report = algo.run(input, parallel)?;
        totals.push(report.timings.total);
        for (k, s) in report.timings.stages.iter().enumerate() {
            if per_stage.len() <= k {
                per_stage.push((s.name, Vec::new()));
            }
            per_stage[k].1.push(s.duration);
        }
        last = Some(report);
    }
    let report = last.expect("at least one repetition");
    Ok(BenchRow {
        n: input.len(),
        ell: input.ell(),
        label: algo.label(),
        n_unique: report.graph.vertex_count(),
        edges: report.graph.edge_count(),
        median_total: median(totals),
        stages: per_stage.into_iter().map(|(n, d)| (n, median(d))).collect(),
        counters: report.timings.counters(),
    })
}

pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.sizes.is_empty() || cfg.sizes.contains(&0) {
        return Err(CliError::Usage(
            "size grid must be nonempty and positive".into(),
        ));
    }
    let algos = strategies(cfg)?;
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        let input = bench_input(cfg, n)?;
        for algo in &algos {
            rows.push(measure(algo.as_ref(), &input, cfg.reps, &cfg.parallel)?);
        }
    }
    Ok(rows)
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Aligned table; the last column is the speedup over `naive` at the same size.
pub fn format_table(rows: &[BenchRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>8} {:>5} {:<16} {:>8} {:>9} {:>11} {:>14} {:>14} {:>9}  stages (ms)",
        "n", "ell", "algorithm", "unique", "edges", "median_ms", "compared", "pruned", "speedup"
    );
    for r in rows {
        let naive = rows
            .iter()
            .find(|o| o.n == r.n && o.ell == r.ell && o.label == "naive")
            .map(|o| o.median_total.as_secs_f64() / r.median_total.as_secs_f64().max(1e-9));
        let stages: Vec<String> = r
            .stages
            .iter()
            .map(|(n, d)| format!("{n}={:.2}", ms(*d)))
            .collect();
        let _ = writeln!(
            out,
            "{:>8} {:>5} {:<16} {:>8} {:>9} {:>11.3} {:>14} {:>14} {:>9}  {}",
            r.n,
            r.ell,
            r.label,
            r.n_unique,
            r.edges,
            ms(r.median_total),
            r.counters.comparisons,
            r.counters.pruned,
            naive.map_or("-".into(), |s| format!("{s:.1}x")),
            stages.join(" ")
        );
    }
    out
}

/// One tab-separated `key=value` record per row.
pub fn format_records(rows: &[BenchRow]) -> String {
    let mut out = String::new();
    for r in rows {
        let _ = write!(
            out,
            "bench\tn={}\tell={}\talgo={}\tn_unique={}\tedges={}\tmedian_micros={}\tcomparisons={}\tpruned={}\tanchor_comparisons={}\tnodes_created={}\tlookups={}",
            r.n,
            r.ell,
            r.label,
            r.n_unique,
            r.edges,
            r.median_total.as_micros(),
            r.counters.comparisons,
            r.counters.pruned,
            r.counters.anchor_comparisons,
            r.counters.nodes_created,
            r.counters.lookups
        );
        for (name, d) in &r.stages {
            let _ = write!(out, "\t{name}_micros={}", d.as_micros());
        }
        out.push('\n');
    }
    out
}

/// Least-squares fit of `t = c * n^alpha` in log-log space; returns `(c, alpha)`.
pub fn fit_power_law(points: &[(f64, f64)]) -> (f64, f64) {
    assert!(points.len() >= 2, "need at least two points");
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, t)| (n.ln(), t.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let alpha = sxy / sxx;
    ((my - alpha * mx).exp(), alpha)
}
