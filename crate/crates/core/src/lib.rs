//! Construction of the cell graph: the graph on distinct binary signatures
//! whose edges join signatures at Hamming distance 1.
//!
//! Three interchangeable strategies are provided through [`algorithm::Registry`]:
//! an all-pairs scan, an all-pairs scan pruned by distances to anchor vectors,
//! and a radix-trie lookup of every single-bit neighbor. The [`scene`] module
//! produces input signatures by sampling points against linear constraints.

pub mod algorithm;
pub mod bitcore;
pub mod engine;
pub mod error;
pub mod graph;
pub mod pairsearch;
pub mod scene;
pub mod trie;

pub use algorithm::{AlgorithmParams, BuildReport, EdgeAlgorithm, Registry};
pub use bitcore::{
    compare_canonical, distance_capped, encode_radix, hamming_distance, BitVector, Bits,
    RadixString, VectorSet,
};
pub use engine::{Counters, ParallelConfig, StageTimings};
pub use error::{Error, Result};
pub use graph::{CellGraph, EdgeList};
pub use pairsearch::{
    chunked_distance, compute_anchor_table, heuristic_edges, naive_edges, AnchorTable,
};
pub use scene::{
    generate_samples, perturbed_multiset, random_vector_multiset, shoemake_quaternion, signature,
    Constraint, SampleConfig, SampleMode, Scene,
};
pub use trie::{construct_tree, sort_dedup, tree_edges, LevelTrie};
