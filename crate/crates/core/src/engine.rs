//! Data-parallel execution: chunked work decomposition over a fixed-size
//! worker pool, ordered merging, and per-stage instrumentation.
//!
//! Work ranges are cut into chunks whose boundaries depend only on the input
//! size and grain, never on the worker count, and results are merged in chunk
//! order. Anything built on [`run_partitioned`] is therefore identical for
//! every worker count.

use std::collections::HashMap;
use std::fmt;
use std::ops::{AddAssign, Range};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{invalid, Error, Result};

/// Segment count used for chunked distance accumulation unless overridden.
pub const DEFAULT_CHUNK_WIDTH: usize = 32;

/// Launch geometry label carried through to benchmark reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridHint {
    pub blocks: u32,
    pub threads: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParallelConfig {
    workers: usize,
    chunk_width: usize,
    grid_hint: Option<GridHint>,
}

impl ParallelConfig {
    pub fn new(workers: usize, chunk_width: usize) -> Result<Self> {
        if workers == 0 {
            return Err(invalid("worker count must be at least 1"));
        }
        if chunk_width == 0 {
            return Err(invalid("chunk width must be at least 1"));
        }
        Ok(Self {
            workers,
            chunk_width,
            grid_hint: None,
        })
    }

    pub fn sequential() -> Self {
        Self {
            workers: 1,
            chunk_width: DEFAULT_CHUNK_WIDTH,
            grid_hint: None,
        }
    }

    pub fn with_grid_hint(mut self, blocks: u32, threads: u32) -> Self {
        self.grid_hint = Some(GridHint { blocks, threads });
        self
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn chunk_width(&self) -> usize {
        self.chunk_width
    }

    pub fn grid_hint(&self) -> Option<GridHint> {
        self.grid_hint
    }
}

impl Default for ParallelConfig {
    /// One worker per available core.
    fn default() -> Self {
        let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        Self {
            workers,
            chunk_width: DEFAULT_CHUNK_WIDTH,
            grid_hint: None,
        }
    }
}

fn pool(workers: usize) -> Result<Arc<ThreadPool>> {
    static POOLS: OnceLock<Mutex<HashMap<usize, Arc<ThreadPool>>>> = OnceLock::new();
    let mut pools = POOLS
        .get_or_init(Default::default)
        .lock()
        .unwrap_or_else(|e| e.into_inner());
    if let Some(p) = pools.get(&workers) {
        return Ok(Arc::clone(p));
    }
    let p = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .thread_name(|i| format!("cellgraph-worker-{i}"))
        .build()
        .map(Arc::new)
        .map_err(|e| Error::Worker(e.to_string()))?;
    pools.insert(workers, Arc::clone(&p));
    Ok(p)
}

/// Splits `0..len` into chunks of at most `grain` items.
pub fn chunk_ranges(len: usize, grain: usize) -> Vec<Range<usize>> {
    let grain = grain.max(1);
    (0..len.div_ceil(grain))
        .map(|c| c * grain..((c + 1) * grain).min(len))
        .collect()
}

fn guarded<T>(task: impl FnOnce() -> Result<T>) -> Result<T> {
    catch_unwind(AssertUnwindSafe(task)).unwrap_or_else(|payload| {
        let msg = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "worker panicked".to_string());
        Err(Error::Worker(msg))
    })
}

/// Runs `task` over every chunk of `0..len` and returns the per-chunk results
/// in chunk order. The first error (or panic) of any chunk fails the run and
/// all partial results are dropped.
pub fn run_partitioned<T, F>(
    len: usize,
    grain: usize,
    cfg: &ParallelConfig,
    task: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Range<usize>) -> Result<T> + Sync,
{
    let chunks = chunk_ranges(len, grain);
    if cfg.workers == 1 || chunks.len() <= 1 {
        return chunks.into_iter().map(|r| guarded(|| task(r))).collect();
    }
    pool(cfg.workers)?.install(|| {
        chunks
            .into_par_iter()
            .map(|r| guarded(|| task(r)))
            .collect::<Result<Vec<T>>>()
    })
}

/// Operation counters collected by the pipelines.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    /// Full (capped) pair comparisons.
    pub comparisons: u64,
    /// Pairs discarded by the anchor test without a comparison.
    pub pruned: u64,
    /// Pairs considered by the pair stage; always `comparisons + pruned`.
    pub candidate_pairs: u64,
    /// Distances computed while filling the anchor table.
    pub anchor_comparisons: u64,
    pub nodes_created: u64,
    /// Trie descents started by the neighbor search.
    pub lookups: u64,
    pub edges: u64,
}

impl AddAssign for Counters {
    fn add_assign(&mut self, o: Self) {
        self.comparisons += o.comparisons;
        self.pruned += o.pruned;
        self.candidate_pairs += o.candidate_pairs;
        self.anchor_comparisons += o.anchor_comparisons;
        self.nodes_created += o.nodes_created;
        self.lookups += o.lookups;
        self.edges += o.edges;
    }
}

impl Counters {
    fn fields(&self) -> [(&'static str, u64); 7] {
        [
            ("comparisons", self.comparisons),
            ("pruned", self.pruned),
            ("candidate_pairs", self.candidate_pairs),
            ("anchor_comparisons", self.anchor_comparisons),
            ("nodes_created", self.nodes_created),
            ("lookups", self.lookups),
            ("edges", self.edges),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageRecord {
    pub name: &'static str,
    pub duration: Duration,
    pub counters: Counters,
}

impl fmt::Display for StageRecord {
    /// `stage=<name>\tmicros=<n>\t<counter>=<n>...`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "stage={}\tmicros={}",
            self.name,
            self.duration.as_micros()
        )?;
        for (k, v) in self.counters.fields() {
            write!(f, "\t{k}={v}")?;
        }
        Ok(())
    }
}

/// Wall-clock time and counters for each stage of one pipeline run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StageTimings {
    pub stages: Vec<StageRecord>,
    pub total: Duration,
    /// Level node counts when a trie was built.
    pub level_nodes: Vec<usize>,
}

impl StageTimings {
    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.name == name)
    }

    pub fn counters(&self) -> Counters {
        let mut c = Counters::default();
        for s in &self.stages {
            c += s.counters;
        }
        c
    }

    pub fn stage_sum(&self) -> Duration {
        self.stages.iter().map(|s| s.duration).sum()
    }

    /// One record per stage, newline separated, followed by a `total` record.
    pub fn to_records(&self) -> String {
        let mut out = String::new();
        for s in &self.stages {
            out.push_str(&s.to_string());
            out.push('\n');
        }
        out.push_str(&format!("stage=total\tmicros={}", self.total.as_micros()));
        if !self.level_nodes.is_empty() {
            let levels: Vec<String> = self.level_nodes.iter().map(|n| n.to_string()).collect();
            out.push_str(&format!("\tlevel_nodes={}", levels.join(",")));
        }
        out.push('\n');
        out
    }
}

/// Times named stages of a pipeline.
#[derive(Debug)]
pub struct StageTimer {
    start: Instant,
    timings: StageTimings,
}

impl Default for StageTimer {
    fn default() -> Self {
        Self::new()
    }
}

impl StageTimer {
    pub fn new() -> Self {
        Self {
            start: Instant::now(),
            timings: StageTimings::default(),
        }
    }

    /// Runs `f` as stage `name`; `f` reports its own counters.
    pub fn stage<T>(
        &mut self,
        name: &'static str,
        f: impl FnOnce() -> Result<(T, Counters)>,
    ) -> Result<T> {
        let t0 = Instant::now();
        let (value, counters) = f()?;
        self.timings.stages.push(StageRecord {
            name,
            duration: t0.elapsed(),
            counters,
        });
        Ok(value)
    }

    pub fn set_level_nodes(&mut self, nodes: Vec<usize>) {
        self.timings.level_nodes = nodes;
    }

    pub fn finish(mut self) -> StageTimings {
        self.timings.total = self.start.elapsed();
        self.timings
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(ParallelConfig::new(0, 32).is_err());
        assert!(ParallelConfig::new(1, 0).is_err());
        let cfg = ParallelConfig::new(4, 8).unwrap().with_grid_hint(4096, 32);
        assert_eq!(
            cfg.grid_hint(),
            Some(GridHint {
                blocks: 4096,
                threads: 32
            })
        );
        assert!(ParallelConfig::default().workers() >= 1);
        assert_eq!(ParallelConfig::default().chunk_width(), DEFAULT_CHUNK_WIDTH);
    }

    #[test]
    fn chunking_covers_range() {
        assert!(chunk_ranges(0, 10).is_empty());
        assert_eq!(chunk_ranges(5, 2), vec![0..2, 2..4, 4..5]);
        assert_eq!(chunk_ranges(3, 0), vec![0..1, 1..2, 2..3]);
    }

    #[test]
    fn results_independent_of_worker_count() {
        let task = |r: Range<usize>| Ok(r.map(|i| i * i).collect::<Vec<_>>());
        let seq = run_partitioned(1000, 7, &ParallelConfig::sequential(), task).unwrap();
        for w in [2, 4, 16] {
            let cfg = ParallelConfig::new(w, 32).unwrap();
            assert_eq!(run_partitioned(1000, 7, &cfg, task).unwrap(), seq);
        }
        let flat: Vec<usize> = seq.into_iter().flatten().collect();
        assert_eq!(flat, (0..1000).map(|i| i * i).collect::<Vec<_>>());
    }

    #[test]
    fn empty_range_is_empty() {
        let out: Vec<()> =
            run_partitioned(0, 4, &ParallelConfig::new(4, 1).unwrap(), |_| Ok(())).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn worker_errors_and_panics_propagate() {
        let cfg = ParallelConfig::new(4, 1).unwrap();
        let err = run_partitioned(100, 3, &cfg, |r| {
            if r.contains(&50) {
                Err(invalid("boom"))
            } else {
                Ok(r.len())
            }
        });
        assert_eq!(err, Err(invalid("boom")));

        let panicked = run_partitioned(10, 1, &cfg, |r| {
            if r.start == 3 {
                panic!("chunk three");
            }
            Ok(())
        });
        assert_eq!(panicked, Err(Error::Worker("chunk three".into())));
    }

    #[test]
    fn counters_sum_across_workers() {
        let task = |r: Range<usize>| {
            Ok(Counters {
                comparisons: r.len() as u64,
                pruned: r.filter(|i| i % 3 == 0).count() as u64,
                ..Default::default()
            })
        };
        let total = |cfg: &ParallelConfig| {
            let mut c = Counters::default();
            for part in run_partitioned(999, 10, cfg, task).unwrap() {
                c += part;
            }
            c
        };
        let seq = total(&ParallelConfig::sequential());
        assert_eq!(seq.comparisons, 999);
        assert_eq!(seq.pruned, 333);
        assert_eq!(total(&ParallelConfig::new(16, 1).unwrap()), seq);
    }

    #[test]
    fn stage_records_are_parseable() {
        let mut timer = StageTimer::new();
        timer
            .stage("sort", || {
                Ok((
                    (),
                    Counters {
                        comparisons: 3,
                        ..Default::default()
                    },
                ))
            })
            .unwrap();
        timer
            .stage("build", || Ok(((), Counters::default())))
            .unwrap();
        timer.set_level_nodes(vec![1, 3, 4]);
        let t = timer.finish();
        assert!(t.stage_sum() <= t.total);
        let text = t.to_records();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("stage=sort\tmicros="));
        assert!(lines[0].contains("\tcomparisons=3"));
        assert!(lines[2].ends_with("level_nodes=1,3,4"));
        for line in lines {
            for field in line.split('\t') {
                assert!(field.split_once('=').is_some(), "{field}");
            }
        }
    }
}
