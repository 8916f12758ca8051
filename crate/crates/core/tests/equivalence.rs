use std::collections::BTreeSet;

use cellgraph::pairsearch::{compute_anchor_table, heuristic_scan, naive_scan};
use cellgraph::trie::tree_pipeline;
use cellgraph::{
    construct_tree, heuristic_edges, naive_edges, perturbed_multiset, sort_dedup, tree_edges,
    BitVector, ParallelConfig, VectorSet,
};
use proptest::prelude::*;

/// Distinct rows in string order and their distance-1 pairs, by character comparison.
fn oracle(rows: &[String]) -> (Vec<String>, Vec<(u32, u32)>) {
    let uniq: Vec<String> = rows
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut edges = Vec::new();
    for i in 0..uniq.len() {
        for j in i + 1..uniq.len() {
            let d = uniq[i]
                .bytes()
                .zip(uniq[j].bytes())
                .filter(|(a, b)| a != b)
                .count();
            if d == 1 {
                edges.push((i as u32, j as u32));
            }
        }
    }
    (uniq, edges)
}

fn rows_of(set: &VectorSet) -> Vec<String> {
    set.iter().map(|v| v.to_string()).collect()
}

fn check_all(set: &VectorSet, cfg: &ParallelConfig) {
    let (names, expect) = oracle(&rows_of(set));
    let sorted = sort_dedup(set).unwrap();
    assert_eq!(rows_of(&sorted), names);
    assert_eq!(naive_edges(&sorted, cfg).unwrap().pairs(), &expect[..]);
    for h in [0, 1, 3, 5, sorted.len()] {
        let h = h.min(sorted.len());
        assert_eq!(
            heuristic_edges(&sorted, h, cfg).unwrap().pairs(),
            &expect[..],
            "h={h}"
        );
    }
    for r in [1, 2, 4, 8] {
        let g = tree_edges(set, r, cfg).unwrap();
        assert_eq!(g.edges().pairs(), &expect[..], "r={r}");
        assert!(g.max_degree() <= set.ell());
        assert!(g.edge_count() * 2 <= g.vertex_count() * set.ell());
    }
}

fn arb_set(max_ell: usize, max_n: usize) -> impl Strategy<Value = VectorSet> {
    (
        1..=max_ell,
        1..=max_n,
        any::<u64>(),
        0.0..0.6f64,
        0.0..=1.0f64,
    )
        .prop_map(|(ell, n, seed, dup, near)| perturbed_multiset(n, ell, dup, near, seed).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn all_algorithms_match_oracle(set in arb_set(140, 120)) {
        check_all(&set, &ParallelConfig::sequential());
    }

    #[test]
    fn trie_invariants_hold(set in arb_set(70, 200), r in 1u32..=9) {
        let sorted = sort_dedup(&set).unwrap();
        let trie = construct_tree(&sorted, r, &ParallelConfig::sequential()).unwrap();
        prop_assert!(trie.validate(&sorted).is_ok());
        prop_assert_eq!(trie.leaf_count(), sorted.len());
        // nodes on level h = distinct digit prefixes of length h
        for (h, &count) in trie.level_node_counts().iter().enumerate() {
            let prefixes: BTreeSet<Vec<u64>> = sorted
                .iter()
                .map(|v| (0..h).map(|d| v.digit(d, r)).collect())
                .collect();
            prop_assert_eq!(count, prefixes.len());
        }
    }

    #[test]
    fn multiset_duplication_changes_nothing(set in arb_set(90, 80), copies in 2usize..4) {
        let mut dup = VectorSet::new(set.ell()).unwrap();
        for _ in 0..copies {
            for v in set.iter() {
                dup.push(v).unwrap();
            }
        }
        let cfg = ParallelConfig::sequential();
        prop_assert_eq!(tree_edges(&dup, 3, &cfg).unwrap(), tree_edges(&set, 3, &cfg).unwrap());
    }
}

#[test]
fn exhaustive_subsets_up_to_length_4() {
    let cfg = ParallelConfig::sequential();
    for ell in 1..=4usize {
        let all: Vec<String> = (0..1u32 << ell).map(|m| format!("{m:0ell$b}")).collect();
        for mask in 1u32..(1u64 << (1 << ell)) as u32 {
            // ell = 4 has 65535 subsets; every algorithm runs on each
            let rows: Vec<&str> = (0..all.len())
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| all[b].as_str())
                .collect();
            check_all(&VectorSet::from_strs(&rows).unwrap(), &cfg);
        }
    }
}

#[test]
fn schedule_independence() {
    let set = perturbed_multiset(3000, 200, 0.2, 0.6, 77).unwrap();
    let sorted = sort_dedup(&set).unwrap();
    let seq = ParallelConfig::sequential();
    let (base_edges, base_counts) = naive_scan(&sorted, &seq).unwrap();
    let (table, _) = compute_anchor_table(&sorted, 3, &seq).unwrap();
    let base_h = heuristic_scan(&sorted, &table, &seq, false).unwrap();
    let (base_tree, base_t) = tree_pipeline(&set, 8, &seq).unwrap();
    assert!(!base_edges.is_empty());
    for workers in [2, 4, 16] {
        let cfg = ParallelConfig::new(workers, 32).unwrap();
        let (e, c) = naive_scan(&sorted, &cfg).unwrap();
        assert_eq!((e, c), (base_edges.clone(), base_counts));
        let (t, _) = compute_anchor_table(&sorted, 3, &cfg).unwrap();
        assert_eq!(t, table);
        assert_eq!(heuristic_scan(&sorted, &t, &cfg, false).unwrap(), base_h);
        let (g, tm) = tree_pipeline(&set, 8, &cfg).unwrap();
        assert_eq!(g, base_tree);
        assert_eq!(tm.counters(), base_t.counters());
        assert_eq!(tm.level_nodes, base_t.level_nodes);
    }
}

#[test]
fn chunk_width_does_not_change_results() {
    let set = sort_dedup(&perturbed_multiset(500, 100, 0.0, 0.7, 3).unwrap()).unwrap();
    let base = heuristic_edges(&set, 3, &ParallelConfig::sequential()).unwrap();
    for w in [1, 7, 32, 100, 1000] {
        let cfg = ParallelConfig::new(1, w).unwrap();
        assert_eq!(heuristic_edges(&set, 3, &cfg).unwrap(), base);
        assert_eq!(
            compute_anchor_table(&set, 3, &cfg).unwrap(),
            compute_anchor_table(&set, 3, &ParallelConfig::sequential()).unwrap()
        );
    }
}

#[test]
fn pruned_pairs_are_never_neighbors() {
    let set = sort_dedup(&perturbed_multiset(800, 48, 0.0, 0.8, 21).unwrap()).unwrap();
    let cfg = ParallelConfig::sequential();
    for h in [1, 3, 5] {
        let (table, _) = compute_anchor_table(&set, h, &cfg).unwrap();
        let run = heuristic_scan(&set, &table, &cfg, true).unwrap();
        let pruned = run.pruned_pairs.unwrap();
        assert!(!pruned.is_empty());
        assert_eq!(pruned.len() as u64, run.counters.pruned);
        for (i, j) in pruned {
            let d = cellgraph::hamming_distance(set.get(i as usize), set.get(j as usize)).unwrap();
            assert!(d >= 2, "pruned pair ({i}, {j}) at distance {d}");
        }
    }
}

#[test]
fn flip_of_a_vector_gives_one_edge() {
    let x: BitVector = "0110100111010001110".parse().unwrap();
    for k in 0..x.len() {
        let set = VectorSet::from_vectors([&x, &x.flip_bit(k).unwrap()]).unwrap();
        for r in [1, 2, 4, 8] {
            assert_eq!(
                tree_edges(&set, r, &ParallelConfig::sequential())
                    .unwrap()
                    .edge_count(),
                1
            );
        }
    }
}
