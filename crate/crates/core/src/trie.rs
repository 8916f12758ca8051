//! Radix sort with deduplication, the level-by-level leaf-only `2^r`-ary
//! search tree over the sorted vectors, and the bit-flip neighbor search.
//!
//! Because the vectors are sorted, the vectors extending a node's prefix by
//! digit `v` form one contiguous index range. Each level therefore stores its
//! occupied `(node, digit)` slots in order as three flat arrays, and the slots
//! of level `h` are exactly the nodes of level `h + 1`. A node whose slot for
//! some digit is not stored has no child for that digit. At the last level a
//! slot's range holds a single vector: the leaf.

use std::ops::Range;

use crate::bitcore::{Bits, RadixString, VectorSet};
use crate::engine::{run_partitioned, Counters, ParallelConfig, StageTimer, StageTimings};
use crate::error::{invalid, Error, Result};
use crate::graph::{CellGraph, EdgeList};

/// Largest supported radix width; nodes have up to `2^16` children.
pub const MAX_RADIX_BITS: u32 = 16;

pub const DEFAULT_RADIX_BITS: u32 = 8;

const SMALL_SORT: usize = 64;

/// Sorts `xs` in canonical order and removes duplicates.
pub fn sort_dedup(xs: &VectorSet) -> Result<VectorSet> {
    if xs.is_empty() {
        return Err(invalid("cannot sort an empty vector set"));
    }
    if xs.len() > u32::MAX as usize {
        return Err(invalid("more than 2^32 vectors"));
    }
    if xs.is_sorted_unique() {
        return Ok(xs.clone());
    }
    let order = radix_order(xs);
    let mut data = Vec::with_capacity(xs.raw().len());
    let mut prev: Option<&[u64]> = None;
    for i in order {
        let w = xs.words_of(i as usize);
        if prev != Some(w) {
            data.extend_from_slice(w);
            prev = Some(w);
        }
    }
    Ok(VectorSet::from_raw(xs.ell(), data, true))
}

/// LSD radix sort over the packed words, one byte per pass, returning the
/// permutation. Passes on which every key byte agrees are skipped.
fn radix_order(xs: &VectorSet) -> Vec<u32> {
    let n = xs.len();
    let stride = xs.stride();
    let raw = xs.raw();
    let mut idx: Vec<u32> = (0..n as u32).collect();
    if n < SMALL_SORT {
        idx.sort_by(|&a, &b| xs.words_of(a as usize).cmp(xs.words_of(b as usize)));
        return idx;
    }
    let mut tmp = vec![0u32; n];
    let mut counts = [0usize; 256];
    for w in (0..stride).rev() {
        for shift in (0..64).step_by(8) {
            let key = |i: u32| (raw[i as usize * stride + w] >> shift & 0xFF) as usize;
            counts.fill(0);
            for row in raw.chunks_exact(stride) {
                counts[(row[w] >> shift & 0xFF) as usize] += 1;
            }
            if counts.contains(&n) {
                continue;
            }
            let mut sum = 0;
            for c in counts.iter_mut() {
                let here = *c;
                *c = sum;
                sum += here;
            }
            for &i in &idx {
                let k = key(i);
                tmp[counts[k]] = i;
                counts[k] += 1;
            }
            std::mem::swap(&mut idx, &mut tmp);
        }
    }
    idx
}

/// One tree level: the occupied child slots of every node on the level.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Level {
    /// Node `j` owns slots `child_start[j]..child_start[j + 1]`.
    child_start: Vec<u32>,
    /// Digit of each slot, increasing within a node.
    digit: Vec<u32>,
    /// Slot `k` covers vectors `lo[k]..lo[k + 1]`; the last entry is `n`.
    lo: Vec<u32>,
}

impl Level {
    fn nodes(&self) -> usize {
        self.child_start.len() - 1
    }

    fn slots(&self) -> usize {
        self.digit.len()
    }

    fn slot_range(&self, slot: usize) -> Range<usize> {
        self.lo[slot] as usize..self.lo[slot + 1] as usize
    }

    #[inline]
    fn child(&self, node: usize, digit: u32) -> Option<usize> {
        let a = self.child_start[node] as usize;
        let b = self.child_start[node + 1] as usize;
        let d = &self.digit[a..b];
        if d.len() <= 8 {
            d.iter().position(|&x| x == digit).map(|p| a + p)
        } else {
            d.binary_search(&digit).ok().map(|p| a + p)
        }
    }
}

/// Leaf-only `2^r`-ary search tree over a sorted unique vector set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelTrie {
    radix_bits: u32,
    ell: usize,
    n: usize,
    levels: Vec<Level>,
}

/// Per-node digit boundaries found by one expansion task.
struct Expansion {
    counts: Vec<u32>,
    digits: Vec<u32>,
    starts: Vec<u32>,
}

impl LevelTrie {
    /// Builds the tree one level at a time; every level is completed (all of
    /// its node expansions merged) before the next one starts.
    pub fn build(xs: &VectorSet, radix_bits: u32, cfg: &ParallelConfig) -> Result<Self> {
        if !xs.is_sorted_unique() {
            return Err(invalid("trie input must be sorted and deduplicated"));
        }
        if xs.is_empty() {
            return Err(invalid("trie input must be nonempty"));
        }
        check_radix(radix_bits)?;
        let n = xs.len();
        let depth = xs.ell().div_ceil(radix_bits as usize);
        let mut levels: Vec<Level> = Vec::with_capacity(depth);
        for h in 0..depth {
            let intervals: Vec<Range<usize>> = match levels.last() {
                None => std::iter::once(0..n).collect(),
                Some(prev) => (0..prev.slots()).map(|s| prev.slot_range(s)).collect(),
            };
            let parts = run_partitioned(intervals.len(), 256, cfg, |nodes| {
                let mut e = Expansion {
                    counts: Vec::with_capacity(nodes.len()),
                    digits: Vec::new(),
                    starts: Vec::new(),
                };
                for node in nodes {
                    let before = e.digits.len();
                    expand(xs, h, radix_bits, intervals[node].clone(), &mut e);
                    e.counts.push((e.digits.len() - before) as u32);
                }
                Ok(e)
            })?;
            // level barrier: merge every node's slots in node order
            let mut level = Level {
                child_start: Vec::with_capacity(intervals.len() + 1),
                ..Default::default()
            };
            level.child_start.push(0);
            for part in parts {
                for c in part.counts {
                    let last = *level.child_start.last().unwrap();
                    level.child_start.push(last + c);
                }
                level.digit.extend(part.digits);
                level.lo.extend(part.starts);
            }
            level.lo.push(n as u32);
            levels.push(level);
        }
        Ok(Self {
            radix_bits,
            ell: xs.ell(),
            n,
            levels,
        })
    }

    pub fn radix_bits(&self) -> u32 {
        self.radix_bits
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Number of vectors indexed.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Nodes on each level, root level first.
    pub fn level_node_counts(&self) -> Vec<usize> {
        self.levels.iter().map(Level::nodes).collect()
    }

    pub fn node_count(&self) -> usize {
        self.levels.iter().map(Level::nodes).sum()
    }

    pub fn leaf_count(&self) -> usize {
        self.levels.last().map_or(0, Level::slots)
    }

    /// Digits of the children present under `node` on `level`.
    pub fn child_digits(&self, level: usize, node: usize) -> Option<&[u32]> {
        let l = self.levels.get(level)?;
        if node >= l.nodes() {
            return None;
        }
        Some(&l.digit[l.child_start[node] as usize..l.child_start[node + 1] as usize])
    }

    /// Index range of the vectors below `node` on `level`.
    pub fn node_range(&self, level: usize, node: usize) -> Option<Range<usize>> {
        if level == 0 {
            return (node == 0).then_some(0..self.n);
        }
        let parent = self.levels.get(level - 1)?;
        (node < parent.slots()).then(|| parent.slot_range(node))
    }

    /// The index range `vectors(node, digit)`, empty when that child is absent.
    pub fn vectors(&self, level: usize, node: usize, digit: u32) -> Option<Range<usize>> {
        let l = self.levels.get(level)?;
        if node >= l.nodes() {
            return None;
        }
        Some(l.child(node, digit).map_or(0..0, |s| l.slot_range(s)))
    }

    /// Follows `q` from the root; returns the node reached on each level plus
    /// the leaf index, or `None` at the first missing child.
    pub fn search_path(&self, q: &RadixString) -> Result<Option<(Vec<usize>, usize)>> {
        self.check_query(q)?;
        let mut path = Vec::with_capacity(self.depth());
        let mut node = 0;
        for (level, &d) in self.levels.iter().zip(q.digits()) {
            path.push(node);
            match level.child(node, d as u32) {
                Some(slot) => node = slot,
                None => return Ok(None),
            }
        }
        let leaf = self.levels.last().expect("nonempty trie").lo[node] as usize;
        Ok(Some((path, leaf)))
    }

    /// Index of the vector whose encoding is `q`, if stored.
    pub fn lookup(&self, q: &RadixString) -> Result<Option<usize>> {
        Ok(self.search_path(q)?.map(|(_, leaf)| leaf))
    }

    fn check_query(&self, q: &RadixString) -> Result<()> {
        if q.radix_bits() != self.radix_bits || q.digits().len() != self.depth() {
            return Err(invalid(format!(
                "query of {} digits with radix width {} does not fit a trie of depth {} and width {}",
                q.digits().len(),
                q.radix_bits(),
                self.depth(),
                self.radix_bits
            )));
        }
        if q.digits().iter().any(|&d| d >> self.radix_bits != 0) {
            return Err(invalid("query digit exceeds the trie alphabet"));
        }
        Ok(())
    }

    /// Looks up `x` with bit `k` negated, descending from the root and
    /// deriving each level's digit from `x` (only one digit differs).
    pub fn lookup_flipped(&self, x: Bits<'_>, k: usize) -> Result<Option<usize>> {
        if x.len() != self.ell {
            return Err(Error::LengthMismatch {
                left: self.ell,
                right: x.len(),
            });
        }
        if k >= self.ell {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: self.ell,
            });
        }
        Ok(self.descend_flipped(x, k, 0, 0))
    }

    #[inline]
    fn flip_mask(&self, k: usize) -> (usize, u32) {
        let r = self.radix_bits as usize;
        (k / r, 1 << (r - 1 - k % r))
    }

    /// Descent for `x` with bit `k` flipped, starting at `node` on `from`.
    /// The caller guarantees levels before `from` match the flipped vector.
    #[inline]
    fn descend_flipped(
        &self,
        x: Bits<'_>,
        k: usize,
        from: usize,
        mut node: usize,
    ) -> Option<usize> {
        let (flip_level, mask) = self.flip_mask(k);
        for (h, level) in self.levels.iter().enumerate().skip(from) {
            let mut d = x.digit(h, self.radix_bits) as u32;
            if h == flip_level {
                d ^= mask;
            }
            node = level.child(node, d)?;
        }
        Some(self.levels.last()?.lo[node] as usize)
    }

    /// Checks the structural invariants against the indexed set.
    pub fn validate(&self, xs: &VectorSet) -> std::result::Result<(), String> {
        if xs.len() != self.n || xs.ell() != self.ell {
            return Err("trie shape does not match the vector set".into());
        }
        if self.depth() != self.ell.div_ceil(self.radix_bits as usize) {
            return Err(format!("depth {} is wrong", self.depth()));
        }
        let mut expected_nodes = 1;
        for (h, level) in self.levels.iter().enumerate() {
            if level.nodes() != expected_nodes {
                return Err(format!(
                    "level {h} has {} nodes, expected {expected_nodes}",
                    level.nodes()
                ));
            }
            if level.lo.len() != level.slots() + 1
                || *level.child_start.last().unwrap() as usize != level.slots()
            {
                return Err(format!("level {h} arrays disagree"));
            }
            for node in 0..level.nodes() {
                let own = self.node_range(h, node).unwrap();
                let slots = level.child_start[node] as usize..level.child_start[node + 1] as usize;
                if slots.is_empty() {
                    return Err(format!("node {node} on level {h} has no children"));
                }
                let mut cursor = own.start;
                let mut last_digit = None;
                for s in slots {
                    let range = level.slot_range(s);
                    if range.start != cursor || range.is_empty() {
                        return Err(format!(
                            "slot {s} on level {h} breaks the interval partition"
                        ));
                    }
                    let d = level.digit[s];
                    if last_digit.is_some_and(|p| p >= d) || d >> self.radix_bits != 0 {
                        return Err(format!("slot {s} on level {h} has digit {d} out of order"));
                    }
                    if range
                        .clone()
                        .any(|i| xs.get(i).digit(h, self.radix_bits) as u32 != d)
                    {
                        return Err(format!(
                            "slot {s} on level {h} holds a vector with another digit"
                        ));
                    }
                    last_digit = Some(d);
                    cursor = range.end;
                }
                if cursor != own.end {
                    return Err(format!(
                        "children of node {node} on level {h} do not cover it"
                    ));
                }
            }
            expected_nodes = level.slots();
        }
        if self.leaf_count() != self.n {
            return Err(format!(
                "{} leaves for {} vectors",
                self.leaf_count(),
                self.n
            ));
        }
        Ok(())
    }
}

/// Scans a sorted interval and appends one slot per distinct digit at `h`.
fn expand(xs: &VectorSet, h: usize, radix_bits: u32, range: Range<usize>, out: &mut Expansion) {
    let mut prev = None;
    for i in range {
        let d = xs.get(i).digit(h, radix_bits) as u32;
        if prev != Some(d) {
            out.digits.push(d);
            out.starts.push(i as u32);
            prev = Some(d);
        }
    }
}

fn check_radix(radix_bits: u32) -> Result<()> {
    if (1..=MAX_RADIX_BITS).contains(&radix_bits) {
        Ok(())
    } else {
        Err(invalid(format!(
            "radix width {radix_bits} outside 1..={MAX_RADIX_BITS}"
        )))
    }
}

/// Builds the trie over a sorted unique set.
pub fn construct_tree(xs: &VectorSet, radix_bits: u32, cfg: &ParallelConfig) -> Result<LevelTrie> {
    LevelTrie::build(xs, radix_bits, cfg)
}

/// Neighbor search: for every vector and every bit that is 0 in it, look up
/// the vector with that bit set. Such a neighbor is canonically greater, so
/// every edge is found exactly once, from its smaller endpoint.
pub fn search_edges(
    trie: &LevelTrie,
    xs: &VectorSet,
    cfg: &ParallelConfig,
) -> Result<(EdgeList, Counters)> {
    let ell = xs.ell();
    let r = trie.radix_bits() as usize;
    let parts = run_partitioned(xs.len(), 64, cfg, |rows| {
        let mut edges: Vec<(u32, u32)> = Vec::new();
        let mut lookups = 0u64;
        let mut path = vec![0usize; trie.depth()];
        let mut found = Vec::new();
        for i in rows {
            let x = xs.get(i);
            // x's own path: the flipped vector shares it above the flipped digit
            let mut node = 0;
            for (h, level) in trie.levels.iter().enumerate() {
                path[h] = node;
                node = level
                    .child(node, x.digit(h, trie.radix_bits) as u32)
                    .ok_or_else(|| {
                        Error::Worker(format!("vector {i} missing from its own trie"))
                    })?;
            }
            found.clear();
            for k in (0..ell).filter(|&k| !x.bit(k)) {
                lookups += 1;
                let from = k / r;
                if let Some(j) = trie.descend_flipped(x, k, from, path[from]) {
                    found.push((i as u32, j as u32));
                }
            }
            // later bits give smaller neighbors
            edges.extend(found.iter().rev());
        }
        Ok((edges, lookups))
    })?;
    let mut counters = Counters::default();
    let mut edges = Vec::new();
    for (e, lookups) in parts {
        counters.lookups += lookups;
        edges.extend(e);
    }
    counters.edges = edges.len() as u64;
    Ok((EdgeList::from_sorted(edges), counters))
}

/// Full tree pipeline with stage timings: sort, build, search.
pub fn tree_pipeline(
    xs: &VectorSet,
    radix_bits: u32,
    cfg: &ParallelConfig,
) -> Result<(CellGraph, StageTimings)> {
    if xs.is_empty() {
        return Err(invalid("cannot build a cell graph from no vectors"));
    }
    check_radix(radix_bits)?;
    let mut timer = StageTimer::new();
    let sorted = timer.stage("sort", || Ok((sort_dedup(xs)?, Counters::default())))?;
    let trie = timer.stage("build", || {
        let t = LevelTrie::build(&sorted, radix_bits, cfg)?;
        let c = Counters {
            nodes_created: t.node_count() as u64,
            ..Default::default()
        };
        Ok((t, c))
    })?;
    let edges = timer.stage("search", || search_edges(&trie, &sorted, cfg))?;
    timer.set_level_nodes(trie.level_node_counts());
    Ok((CellGraph::new(sorted, edges)?, timer.finish()))
}

/// Cell graph of `xs` (any multiset) via the radix trie.
pub fn tree_edges(xs: &VectorSet, radix_bits: u32, cfg: &ParallelConfig) -> Result<CellGraph> {
    tree_pipeline(xs, radix_bits, cfg).map(|(g, _)| g)
}
