mod common;

use std::collections::BTreeSet;

use common::*;
use egotrans::embed::step_vectors;
use egotrans::graph::fixtures::{ego_example, example_pair};
use egotrans::graph::Side;
use egotrans::{
    count_step_vector, egonet, embed_all, induced_edges, padded_pair, Aggregation, Execution, LabeledTransition,
    NodeId,
};
use proptest::prelude::*;

fn class_id(k: usize, rooted: bool, l: &[(usize, usize)], r: &[(usize, usize)]) -> usize {
    let t = LabeledTransition::from_edges(k, rooted, l, r).unwrap();
    catalog3().lookup(&t).unwrap().unwrap()
}

#[test]
fn ego_example_counts() {
    let v = count_step_vector(&example_pair(), catalog3());
    assert_eq!(v.get(class_id(2, true, &[], &[(0, 1)])), 1);
    assert_eq!(v.get(class_id(2, false, &[], &[(0, 1)])), 5);
    assert_eq!(v.get(class_id(3, true, &[(0, 1), (0, 2)], &[(0, 1), (0, 2), (1, 2)])), 3);
    assert_eq!(v.get(class_id(2, false, &[(0, 1)], &[])), 1);
    assert_eq!(v.to_dense(), nested_loop_counts(&example_pair(), catalog3()));
}

#[test]
fn ego_example_embedding_of_v_is_its_step_vector() {
    let e = embed_all(&ego_example(), catalog3(), Aggregation::Mean, Some(&[NodeId(0)]), Execution::Sequential).unwrap();
    let step = count_step_vector(&example_pair(), catalog3()).to_dense();
    assert_eq!(e.len(), 1);
    assert_eq!(e[0].values, step.iter().map(|&c| c as f64).collect::<Vec<_>>());
}

#[test]
fn nested_loop_oracle_on_fixed_random_pairs() {
    let mut rng = seeded(11);
    for i in 0..60 {
        let n = 4 + i % 9;
        let p = [0.15, 0.3, 0.5][i % 3];
        check_nested_loops(&random_pair(&mut rng, n, p)).unwrap();
    }
}

#[test]
fn synthetic_anomalies_share_one_embedding() {
    let cfg = egotrans::SynthConfig::default();
    let s = egotrans::synth::generate(&cfg).unwrap();
    let emb = embed_all(&s.graph, catalog3(), Aggregation::Mean, None, Execution::Parallel).unwrap();
    let first = cfg.n - cfg.anomaly_count();
    let anomalous = &emb[first].values;
    assert!(anomalous.iter().any(|&x| x > 0.0));
    for e in &emb[first..] {
        assert_eq!(&e.values, anomalous);
    }
    for e in &emb[..first] {
        assert_ne!(&e.values, anomalous);
    }
}

#[test]
fn unchanged_snapshots_give_zero_vectors() {
    let mut rng = seeded(5);
    let edges = random_edges(&mut rng, 15, 0.3);
    let g = graph(15, &[edges.clone(), edges.clone(), edges]);
    for e in embed_all(&g, catalog3(), Aggregation::Mean, None, Execution::Sequential).unwrap() {
        assert!(e.values.iter().all(|&x| x == 0.0));
    }
}

#[test]
fn unchanged_egonet_gives_zero_vector_amid_change() {
    // node 0's closed neighborhood {0,1,2} is untouched; 3-4 flips
    let g = graph(5, &[vec![(0, 1), (1, 2), (3, 4)], vec![(0, 1), (1, 2)]]);
    let v = step_vectors(&g, catalog3(), Some(&[NodeId(0)]), Execution::Sequential).unwrap();
    assert_eq!(v[0][0].total(), 0);
}

fn binom(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nested_loop_oracle_equivalence(n in 2usize..=12, p in 0.05f64..0.7, seed in any::<u64>()) {
        let pair = random_pair(&mut seeded(seed), n, p);
        prop_assert!(pair.union_members.len() <= 12);
        if let Err(e) = check_nested_loops(&pair) {
            return Err(TestCaseError::fail(e));
        }
    }

    #[test]
    fn permutation_equivariance(g in arb_graph(14, 4), seed in any::<u64>()) {
        let perm = random_perm(&mut seeded(seed), g.node_count());
        if let Err(e) = check_permutation_equivariance(&g, &perm) {
            return Err(TestCaseError::fail(e));
        }
    }

    #[test]
    fn time_reversal_duality(g in arb_graph(14, 4)) {
        if let Err(e) = check_time_reversal(&g) {
            return Err(TestCaseError::fail(e));
        }
        let cat = catalog3();
        for kind in [Aggregation::Mean, Aggregation::Sum] {
            let f = embed_all(&g, cat, kind, None, Execution::Sequential).unwrap();
            let r = embed_all(&g.reversed(), cat, kind, None, Execution::Sequential).unwrap();
            for (a, b) in f.iter().zip(&r) {
                for c in 0..cat.len() {
                    prop_assert!((a.values[c] - b.values[cat.reversed_id(c)]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn count_conservation_and_subset_bound(n in 2usize..=12, p in 0.05f64..0.7, seed in any::<u64>()) {
        let pair = random_pair(&mut seeded(seed), n, p);
        let cat = catalog3();
        let v = count_step_vector(&pair, cat);
        let unrooted_k2: u64 = cat
            .classes()
            .iter()
            .filter(|c| c.canonical.k == 2 && !c.canonical.rooted)
            .map(|c| v.get(c.id))
            .sum();
        let before: BTreeSet<_> = pair.edges_before.iter().copied().collect();
        let after: BTreeSet<_> = pair.edges_after.iter().copied().collect();
        let changed = before
            .symmetric_difference(&after)
            .filter(|(a, b)| *a != pair.root && *b != pair.root)
            .count() as u64;
        prop_assert_eq!(unrooted_k2, changed);
        let m = pair.union_members.len();
        prop_assert!(v.total() <= binom(m, 2) + binom(m, 3));
        prop_assert_eq!(v.dim(), cat.len());
    }

    #[test]
    fn egonet_matches_definition(g in arb_graph(12, 2), v in 0usize..12) {
        let s = &g.snapshots()[0];
        let v = NodeId((v % g.node_count()) as u32);
        let e = egonet(s, v).unwrap();
        let members: Vec<NodeId> = (0..g.node_count() as u32)
            .map(NodeId)
            .filter(|&u| u == v || s.has_edge(u, v))
            .collect();
        prop_assert_eq!(&e.members, &members);
        let mut edges = Vec::new();
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                if s.has_edge(a, b) {
                    edges.push((a, b));
                }
            }
        }
        let mut got = e.edges.clone();
        got.sort_unstable();
        prop_assert_eq!(got, edges);
    }

    #[test]
    fn padded_pair_structure(g in arb_graph(12, 2), v in 0usize..12) {
        let v = NodeId((v % g.node_count()) as u32);
        let (s0, s1) = (&g.snapshots()[0], &g.snapshots()[1]);
        let pair = padded_pair(s0, s1, v).unwrap();
        let mut union = egonet(s0, v).unwrap().members;
        union.extend(egonet(s1, v).unwrap().members);
        union.sort_unstable();
        union.dedup();
        prop_assert_eq!(&pair.union_members, &union);
        prop_assert_eq!(padded_pair(s1, s0, v).unwrap(), pair.swapped());
        for side in [Side::Before, Side::After] {
            let all = induced_edges(&pair, &pair.union_members, side).unwrap();
            prop_assert_eq!(all.len(), pair.edges(side).len());
        }
    }

    #[test]
    fn mean_lies_between_min_and_max(g in arb_graph(10, 5)) {
        let cat = catalog3();
        let get = |k| embed_all(&g, cat, k, None, Execution::Sequential).unwrap();
        let (mean, lo, hi, sum) = (get(Aggregation::Mean), get(Aggregation::Min), get(Aggregation::Max), get(Aggregation::Sum));
        for i in 0..mean.len() {
            for c in 0..cat.len() {
                prop_assert!(lo[i].values[c] <= mean[i].values[c] + 1e-12);
                prop_assert!(mean[i].values[c] <= hi[i].values[c] + 1e-12);
                prop_assert_eq!(sum[i].values[c].fract(), 0.0);
            }
        }
    }

    #[test]
    fn parallel_equals_sequential(g in arb_graph(20, 4)) {
        let cat = catalog3();
        let a = embed_all(&g, cat, Aggregation::Mean, None, Execution::Sequential).unwrap();
        let b = embed_all(&g, cat, Aggregation::Mean, None, Execution::Parallel).unwrap();
        prop_assert_eq!(a, b);
    }
}
