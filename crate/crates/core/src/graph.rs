use crate::bitcore::{distance_words, VectorSet};
use crate::error::{invalid, Result};

/// Canonically ordered distance-1 pairs `(i, j)`, `i < j`, indexing a sorted
/// unique vertex set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeList {
    edges: Vec<(u32, u32)>,
}

impl EdgeList {
    /// Sorts the pairs and checks `i < j` and uniqueness.
    pub fn from_pairs(mut edges: Vec<(u32, u32)>) -> Result<Self> {
        if let Some(&(i, j)) = edges.iter().find(|(i, j)| i >= j) {
            return Err(invalid(format!("edge ({i}, {j}) is not ordered i < j")));
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(invalid(format!("duplicate edge {:?}", w[0])));
        }
        Ok(Self { edges })
    }

    /// Caller guarantees sorted, unique, `i < j`.
    pub(crate) fn from_sorted(edges: Vec<(u32, u32)>) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(edges.iter().all(|(i, j)| i < j));
        Self { edges }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(i, j)| (i as usize, j as usize))
    }
}

/// Distinct signatures plus the edges between signatures at distance 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellGraph {
    vertices: VectorSet,
    edges: EdgeList,
}

impl CellGraph {
    pub fn new(vertices: VectorSet, edges: EdgeList) -> Result<Self> {
        if !vertices.is_sorted_unique() {
            return Err(invalid(
                "cell graph vertices must be sorted and deduplicated",
            ));
        }
        let n = vertices.len();
        if let Some((i, j)) = edges.iter().find(|&(_, j)| j >= n) {
            return Err(invalid(format!(
                "edge ({i}, {j}) out of range for {n} vertices"
            )));
        }
        Ok(Self { vertices, edges })
    }

    pub fn vertices(&self) -> &VectorSet {
        &self.vertices
    }

    pub fn edges(&self) -> &EdgeList {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertices.len()];
        for (i, j) in self.edges.iter() {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Every listed edge joins vertices at distance exactly 1. Completeness is
    /// not checked here.
    pub fn edges_are_sound(&self) -> bool {
        self.edges.iter().all(|(i, j)| {
            distance_words(self.vertices.get(i).words(), self.vertices.get(j).words()) == 1
        })
    }
}
