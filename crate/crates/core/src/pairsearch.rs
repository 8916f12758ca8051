//! All-pairs edge construction: the naive scan and the anchor-pruned scan.
//!
//! The anchors are the first `h` vectors of the sorted set. Their distances to
//! every vector are computed up front; a pair `(i, j)` can then be discarded
//! whenever some anchor `d` has `|dist(d, i) - dist(d, j)| >= 2`, since the
//! reverse triangle inequality bounds `dist(i, j)` from below by that gap.

use crate::bitcore::{distance_words_capped, Bits, VectorSet};
use crate::engine::{run_partitioned, Counters, ParallelConfig, StageTimer, StageTimings};
use crate::error::{invalid, Error, Result};
use crate::graph::{CellGraph, EdgeList};
use crate::trie::sort_dedup;

/// Anchor count used when none is given.
pub const DEFAULT_ANCHORS: usize = 3;

/// Rows of the pair scan handed to one task.
const PAIR_GRAIN: usize = 16;

/// Per-segment mismatch counts of `x` and `y` split into `w` segments of
/// `⌈ℓ/w⌉` bits (the last one shorter, trailing ones possibly empty).
pub fn segment_counts(x: Bits<'_>, y: Bits<'_>, w: usize) -> Result<Vec<usize>> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let ell = x.len();
    if w == 0 || w > ell {
        return Err(invalid(format!("chunk count {w} outside 1..={ell}")));
    }
    let seg = ell.div_ceil(w);
    Ok((0..w)
        .map(|t| {
            let start = (t * seg).min(ell);
            let end = ((t + 1) * seg).min(ell);
            x.mismatches_in(&y, start, end)
        })
        .collect())
}

/// Hamming distance as the sum of `w` per-segment mismatch counts.
pub fn chunked_distance(x: Bits<'_>, y: Bits<'_>, w: usize) -> Result<usize> {
    Ok(segment_counts(x, y, w)?.into_iter().sum())
}

/// Exact distances from each of the first `h` vectors to all `n` vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnchorTable {
    h: usize,
    n: usize,
    /// Vector-major: the `h` anchor distances of vector `j` are contiguous.
    profiles: Vec<u32>,
}

impl AnchorTable {
    pub fn anchors(&self) -> usize {
        self.h
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.h == 0
    }

    /// `dist(x_anchor, x_j)`.
    pub fn get(&self, anchor: usize, j: usize) -> u32 {
        assert!(
            anchor < self.h && j < self.n,
            "anchor table index out of range"
        );
        self.profiles[j * self.h + anchor]
    }

    pub fn row(&self, anchor: usize) -> Vec<u32> {
        (0..self.n).map(|j| self.get(anchor, j)).collect()
    }

    #[inline]
    fn profile(&self, j: usize) -> &[u32] {
        &self.profiles[j * self.h..(j + 1) * self.h]
    }

    /// True when some anchor separates `i` and `j` by at least 2.
    #[inline]
    pub fn prunes(&self, i: usize, j: usize) -> bool {
        separated(self.profile(i), self.profile(j))
    }
}

#[inline]
fn separated(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).any(|(&p, &q)| p.abs_diff(q) >= 2)
}

/// Fills the anchor table with chunked distances (`cfg.chunk_width()`
/// segments, clamped to ℓ). Returns the number of distances computed.
pub fn compute_anchor_table(
    xs: &VectorSet,
    h: usize,
    cfg: &ParallelConfig,
) -> Result<(AnchorTable, u64)> {
    let n = xs.len();
    if h > n {
        return Err(invalid(format!("{h} anchors requested from {n} vectors")));
    }
    let w = cfg.chunk_width().min(xs.ell());
    let parts = run_partitioned(n, 1024, cfg, |cols| {
        let mut out = Vec::with_capacity(cols.len() * h);
        let mut computed = 0u64;
        for j in cols {
            for a in 0..h {
                if a == j {
                    out.push(0);
                } else {
                    out.push(chunked_distance(xs.get(a), xs.get(j), w)? as u32);
                    computed += 1;
                }
            }
        }
        Ok((out, computed))
    })?;
    let mut profiles = Vec::with_capacity(n * h);
    let mut computed = 0;
    for (p, c) in parts {
        profiles.extend(p);
        computed += c;
    }
    Ok((AnchorTable { h, n, profiles }, computed))
}

/// Result of one anchor-pruned scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeuristicRun {
    pub edges: EdgeList,
    pub counters: Counters,
    /// Every pair skipped by the anchor test, when recording was requested.
    pub pruned_pairs: Option<Vec<(u32, u32)>>,
}

fn require_sorted_unique(xs: &VectorSet) -> Result<()> {
    if xs.is_sorted_unique() {
        Ok(())
    } else {
        Err(invalid(
            "pair search requires a sorted, deduplicated vector set",
        ))
    }
}

/// Anchor pairs come straight from the table; every other pair is pruned or
/// compared with a distance capped at 2.
pub fn heuristic_scan(
    xs: &VectorSet,
    table: &AnchorTable,
    cfg: &ParallelConfig,
    record_pruned: bool,
) -> Result<HeuristicRun> {
    require_sorted_unique(xs)?;
    let n = xs.len();
    let h = table.anchors();
    if table.len() != n {
        return Err(invalid("anchor table was built for another vector set"));
    }
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for a in 0..h {
        for j in a + 1..n {
            if table.get(a, j) == 1 {
                edges.push((a as u32, j as u32));
            }
        }
    }

    let stride = xs.stride();
    let raw = xs.raw();
    let parts = run_partitioned(n.saturating_sub(h), PAIR_GRAIN, cfg, |rows| {
        let mut found = Vec::new();
        let mut pruned_pairs = Vec::new();
        let mut c = Counters::default();
        for i in rows.start + h..rows.end + h {
            let xi = &raw[i * stride..(i + 1) * stride];
            let pi = table.profile(i);
            for j in i + 1..n {
                c.candidate_pairs += 1;
                if h > 0 && separated(pi, table.profile(j)) {
                    c.pruned += 1;
                    if record_pruned {
                        pruned_pairs.push((i as u32, j as u32));
                    }
                    continue;
                }
                c.comparisons += 1;
                if distance_words_capped(xi, &raw[j * stride..(j + 1) * stride], 2) == 1 {
                    found.push((i as u32, j as u32));
                }
            }
        }
        Ok((found, pruned_pairs, c))
    })?;

    let mut counters = Counters::default();
    let mut pruned = record_pruned.then(Vec::new);
    for (found, p, c) in parts {
        edges.extend(found);
        if let Some(all) = pruned.as_mut() {
            all.extend(p);
        }
        counters += c;
    }
    edges.sort_unstable();
    counters.edges = edges.len() as u64;
    Ok(HeuristicRun {
        edges: EdgeList::from_sorted(edges),
        counters,
        pruned_pairs: pruned,
    })
}

/// Distance-1 pairs of a sorted unique set using the first `h` vectors as anchors.
pub fn heuristic_edges(xs: &VectorSet, h: usize, cfg: &ParallelConfig) -> Result<EdgeList> {
    require_sorted_unique(xs)?;
    let (table, _) = compute_anchor_table(xs, h, cfg)?;
    Ok(heuristic_scan(xs, &table, cfg, false)?.edges)
}

/// Compares every pair of a sorted unique set.
pub fn naive_scan(xs: &VectorSet, cfg: &ParallelConfig) -> Result<(EdgeList, Counters)> {
    require_sorted_unique(xs)?;
    let n = xs.len();
    let stride = xs.stride();
    let raw = xs.raw();
    let parts = run_partitioned(n, PAIR_GRAIN, cfg, |rows| {
        let mut found = Vec::new();
        let mut compared = 0u64;
        for i in rows {
            let xi = &raw[i * stride..(i + 1) * stride];
            for (off, xj) in raw[(i + 1) * stride..].chunks_exact(stride).enumerate() {
                if distance_words_capped(xi, xj, 2) == 1 {
                    found.push((i as u32, (i + 1 + off) as u32));
                }
            }
            compared += (n - i - 1) as u64;
        }
        Ok((found, compared))
    })?;
    let mut edges = Vec::new();
    let mut counters = Counters::default();
    for (found, compared) in parts {
        edges.extend(found);
        counters.comparisons += compared;
    }
    counters.candidate_pairs = counters.comparisons;
    counters.edges = edges.len() as u64;
    Ok((EdgeList::from_sorted(edges), counters))
}

pub fn naive_edges(xs: &VectorSet, cfg: &ParallelConfig) -> Result<EdgeList> {
    naive_scan(xs, cfg).map(|(e, _)| e)
}

/// Sort, then compare all pairs.
pub fn naive_pipeline(xs: &VectorSet, cfg: &ParallelConfig) -> Result<(CellGraph, StageTimings)> {
    let mut timer = StageTimer::new();
    let sorted = timer.stage("sort", || Ok((sort_dedup(xs)?, Counters::default())))?;
    let edges = timer.stage("pairs", || naive_scan(&sorted, cfg))?;
    Ok((CellGraph::new(sorted, edges)?, timer.finish()))
}

/// Sort, fill the anchor table, then scan the remaining pairs. `h` is capped
/// at the number of distinct vectors.
pub fn heuristic_pipeline(
    xs: &VectorSet,
    h: usize,
    cfg: &ParallelConfig,
) -> Result<(CellGraph, StageTimings)> {
    let mut timer = StageTimer::new();
    let sorted = timer.stage("sort", || Ok((sort_dedup(xs)?, Counters::default())))?;
    let h = h.min(sorted.len());
    let table = timer.stage("anchor", || {
        let (t, computed) = compute_anchor_table(&sorted, h, cfg)?;
        Ok((
            t,
            Counters {
                anchor_comparisons: computed,
                ..Default::default()
            },
        ))
    })?;
    let run = timer.stage("pairs", || {
        let run = heuristic_scan(&sorted, &table, cfg, false)?;
        let c = run.counters;
        Ok((run, c))
    })?;
    Ok((CellGraph::new(sorted, run.edges)?, timer.finish()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitcore::BitVector;

    fn sorted(items: &[&str]) -> VectorSet {
        sort_dedup(&VectorSet::from_strs(items).unwrap()).unwrap()
    }

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    /// Reference edge set by direct distance evaluation.
    fn brute(xs: &VectorSet) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                let d = (0..xs.ell())
                    .filter(|&k| xs.get(i).get_bit(k).unwrap() != xs.get(j).get_bit(k).unwrap())
                    .count();
                if d == 1 {
                    out.push((i as u32, j as u32));
                }
            }
        }
        out
    }

    #[test]
    fn chunked_distance_examples() {
        let (x, y) = (bv("111"), bv("110"));
        assert_eq!(
            segment_counts(x.as_bits(), y.as_bits(), 3).unwrap(),
            vec![0, 0, 1]
        );
        assert_eq!(chunked_distance(x.as_bits(), y.as_bits(), 3).unwrap(), 1);
        assert_eq!(chunked_distance(x.as_bits(), y.as_bits(), 1).unwrap(), 1);
        assert!(chunked_distance(x.as_bits(), y.as_bits(), 0).is_err());
        assert!(chunked_distance(x.as_bits(), y.as_bits(), 4).is_err());
        // 10 bits, 6 segments of 2: the sixth segment is empty
        let (a, b) = (bv("1100110011"), bv("0101010101"));
        assert_eq!(
            segment_counts(a.as_bits(), b.as_bits(), 6).unwrap(),
            vec![1, 1, 1, 1, 1, 0]
        );
    }

    #[test]
    fn anchor_table_example() {
        let xs = sorted(&["111", "110", "100", "101"]);
        let cfg = ParallelConfig::sequential();
        let (t, computed) = compute_anchor_table(&xs, 1, &cfg).unwrap();
        assert_eq!(t.row(0), vec![0, 1, 1, 2]);
        assert_eq!(computed, 3);
        let (empty, computed) = compute_anchor_table(&xs, 0, &cfg).unwrap();
        assert!(empty.is_empty());
        assert_eq!(computed, 0);
        assert!(compute_anchor_table(&xs, 5, &cfg).is_err());

        let (full, _) = compute_anchor_table(&xs, 4, &cfg).unwrap();
        for a in 0..4 {
            assert_eq!(full.get(a, a), 0);
            for b in 0..4 {
                assert_eq!(full.get(a, b), full.get(b, a));
            }
        }
    }

    #[test]
    fn triangle_cycle_for_every_anchor_count() {
        let xs = sorted(&["111", "110", "100", "101"]);
        let cycle = [(0, 1), (0, 2), (1, 3), (2, 3)];
        let cfg = ParallelConfig::sequential();
        for h in 0..=4 {
            assert_eq!(
                heuristic_edges(&xs, h, &cfg).unwrap().pairs(),
                &cycle,
                "h={h}"
            );
        }
        assert_eq!(naive_edges(&xs, &cfg).unwrap().pairs(), &cycle);
    }

    #[test]
    fn pruned_pair_has_distance_two() {
        // anchor 000; 111 is at 3, 100 at 1
        let xs = sorted(&["000", "111", "100"]);
        let (t, _) = compute_anchor_table(&xs, 1, &ParallelConfig::sequential()).unwrap();
        let i = xs.iter().position(|v| v.to_string() == "100").unwrap();
        let j = xs.iter().position(|v| v.to_string() == "111").unwrap();
        assert!(t.prunes(i.min(j), i.max(j)));
        let run = heuristic_scan(&xs, &t, &ParallelConfig::sequential(), true).unwrap();
        assert_eq!(
            run.pruned_pairs.unwrap(),
            vec![(i.min(j) as u32, i.max(j) as u32)]
        );
        assert_eq!(
            run.counters.pruned + run.counters.comparisons,
            run.counters.candidate_pairs
        );
    }

    #[test]
    fn naive_small_cases() {
        let cfg = ParallelConfig::sequential();
        assert!(naive_edges(&sorted(&["0110"]), &cfg).unwrap().is_empty());
        let x = bv("0110100");
        let y = x.flip_bit(4).unwrap();
        let xs = sort_dedup(&VectorSet::from_vectors([&x, &y]).unwrap()).unwrap();
        assert_eq!(naive_edges(&xs, &cfg).unwrap().len(), 1);
        assert!(naive_edges(&VectorSet::from_strs(&["1", "0"]).unwrap(), &cfg).is_err());
    }

    #[test]
    fn exhaustive_length4_subsets() {
        let all: Vec<String> = (0..16).map(|m| format!("{m:04b}")).collect();
        let cfg = ParallelConfig::sequential();
        for mask in 1u32..1 << 16 {
            if mask % 7 != 0 {
                continue;
            }
            let items: Vec<&str> = (0..16)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| all[b].as_str())
                .collect();
            let xs = sorted(&items);
            let expect = brute(&xs);
            assert_eq!(naive_edges(&xs, &cfg).unwrap().pairs(), &expect[..]);
            for h in [0, 1, 3, xs.len()] {
                let h = h.min(xs.len());
                assert_eq!(heuristic_edges(&xs, h, &cfg).unwrap().pairs(), &expect[..]);
            }
        }
    }

    #[test]
    fn pipelines_report_stages() {
        let xs = VectorSet::from_strs(&["111", "110", "100", "101", "111"]).unwrap();
        let cfg = ParallelConfig::sequential();
        let (g, t) = heuristic_pipeline(&xs, 0, &cfg).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert_eq!(t.stage("anchor").unwrap().counters.anchor_comparisons, 0);
        let pairs = t.stage("pairs").unwrap().counters;
        assert_eq!(pairs.comparisons, 6);
        let (g2, t2) = naive_pipeline(&xs, &cfg).unwrap();
        assert_eq!(g, g2);
        assert_eq!(t2.stages.len(), 2);
        // more anchors than vectors is capped
        let (g3, _) = heuristic_pipeline(&xs, 10, &cfg).unwrap();
        assert_eq!(g, g3);
    }
}
