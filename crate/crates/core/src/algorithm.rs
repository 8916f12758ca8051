//! Edge-construction strategies behind one trait, registered by name.

use std::fmt;

use crate::bitcore::VectorSet;
use crate::engine::{ParallelConfig, StageTimings};
use crate::error::{invalid, Result};
use crate::graph::CellGraph;
use crate::pairsearch::{heuristic_pipeline, naive_pipeline, DEFAULT_ANCHORS};
use crate::trie::{tree_pipeline, DEFAULT_RADIX_BITS, MAX_RADIX_BITS};

/// Graph and instrumentation from one pipeline run.
#[derive(Clone, Debug)]
pub struct BuildReport {
    pub graph: CellGraph,
    pub timings: StageTimings,
}

/// A way of building the cell graph of an arbitrary vector multiset.
pub trait EdgeAlgorithm: Send + Sync + fmt::Debug {
    /// Registry name.
    fn name(&self) -> &'static str;

    /// Name plus parameters, for reports.
    fn label(&self) -> String {
        self.name().to_string()
    }

    fn run(&self, input: &VectorSet, cfg: &ParallelConfig) -> Result<BuildReport>;
}

/// Tunables shared by the strategy factories.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AlgorithmParams {
    /// Anchor count `h` for the heuristic.
    pub anchors: usize,
    /// Radix width `r` for the tree.
    pub radix_bits: u32,
}

impl Default for AlgorithmParams {
    fn default() -> Self {
        Self {
            anchors: DEFAULT_ANCHORS,
            radix_bits: DEFAULT_RADIX_BITS,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Naive;

impl EdgeAlgorithm for Naive {
    fn name(&self) -> &'static str {
        "naive"
    }

    fn run(&self, input: &VectorSet, cfg: &ParallelConfig) -> Result<BuildReport> {
        let (graph, timings) = naive_pipeline(input, cfg)?;
        Ok(BuildReport { graph, timings })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Heuristic {
    pub anchors: usize,
}

impl EdgeAlgorithm for Heuristic {
    fn name(&self) -> &'static str {
        "heuristic"
    }

    fn label(&self) -> String {
        format!("heuristic(h={})", self.anchors)
    }

    fn run(&self, input: &VectorSet, cfg: &ParallelConfig) -> Result<BuildReport> {
        let (graph, timings) = heuristic_pipeline(input, self.anchors, cfg)?;
        Ok(BuildReport { graph, timings })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Tree {
    pub radix_bits: u32,
}

impl EdgeAlgorithm for Tree {
    fn name(&self) -> &'static str {
        "tree"
    }

    fn label(&self) -> String {
        format!("tree(r={})", self.radix_bits)
    }

    fn run(&self, input: &VectorSet, cfg: &ParallelConfig) -> Result<BuildReport> {
        let (graph, timings) = tree_pipeline(input, self.radix_bits, cfg)?;
        Ok(BuildReport { graph, timings })
    }
}

pub type Factory = fn(&AlgorithmParams) -> Result<Box<dyn EdgeAlgorithm>>;

struct Entry {
    name: &'static str,
    summary: &'static str,
    factory: Factory,
}

/// Name-to-factory table of edge algorithms.
pub struct Registry {
    entries: Vec<Entry>,
}

impl fmt::Debug for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

impl Default for Registry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl Registry {
    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    /// `naive`, `heuristic` and `tree`.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register("naive", "compare every pair of distinct vectors", |_| {
            Ok(Box::new(Naive))
        })
        .expect("fresh registry");
        r.register(
            "heuristic",
            "pair scan pruned by distances to h anchor vectors",
            |p| Ok(Box::new(Heuristic { anchors: p.anchors })),
        )
        .expect("fresh registry");
        r.register("tree", "radix trie lookup of every single-bit flip", |p| {
            if !(1..=MAX_RADIX_BITS).contains(&p.radix_bits) {
                return Err(invalid(format!(
                    "radix width {} outside 1..={MAX_RADIX_BITS}",
                    p.radix_bits
                )));
            }
            Ok(Box::new(Tree {
                radix_bits: p.radix_bits,
            }))
        })
        .expect("fresh registry");
        r
    }

    pub fn register(
        &mut self,
        name: &'static str,
        summary: &'static str,
        factory: Factory,
    ) -> Result<()> {
        if self.entries.iter().any(|e| e.name == name) {
            return Err(invalid(format!("algorithm {name:?} is already registered")));
        }
        self.entries.push(Entry {
            name,
            summary,
            factory,
        });
        Ok(())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name).collect()
    }

    pub fn summary(&self, name: &str) -> Option<&'static str> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .map(|e| e.summary)
    }

    pub fn create(&self, name: &str, params: &AlgorithmParams) -> Result<Box<dyn EdgeAlgorithm>> {
        let entry = self
            .entries
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| {
                invalid(format!(
                    "unknown algorithm {name:?}; expected one of {}",
                    self.names().join(", ")
                ))
            })?;
        (entry.factory)(params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_names_and_lookup() {
        let reg = Registry::builtin();
        assert_eq!(reg.names(), ["naive", "heuristic", "tree"]);
        let p = AlgorithmParams::default();
        assert_eq!(p.anchors, 3);
        assert_eq!(p.radix_bits, 8);
        assert_eq!(reg.create("tree", &p).unwrap().label(), "tree(r=8)");
        assert_eq!(
            reg.create("heuristic", &p).unwrap().label(),
            "heuristic(h=3)"
        );
        assert!(reg.create("bogus", &p).is_err());
        let bad = AlgorithmParams { radix_bits: 0, ..p };
        assert!(reg.create("tree", &bad).is_err());
        assert!(reg.summary("naive").is_some());
    }

    #[test]
    fn duplicate_registration_fails() {
        let mut reg = Registry::builtin();
        assert!(reg
            .register("naive", "again", |_| Ok(Box::new(Naive)))
            .is_err());
    }

    #[test]
    fn every_strategy_builds_the_same_graph() {
        let xs = VectorSet::from_strs(&["111", "110", "100", "101", "110"]).unwrap();
        let reg = Registry::builtin();
        let cfg = ParallelConfig::sequential();
        let graphs: Vec<CellGraph> = reg
            .names()
            .into_iter()
            .map(|n| {
                reg.create(n, &AlgorithmParams::default())
                    .unwrap()
                    .run(&xs, &cfg)
                    .unwrap()
                    .graph
            })
            .collect();
        assert_eq!(graphs[0].edge_count(), 4);
        assert!(graphs.windows(2).all(|w| w[0] == w[1]));
    }
}
