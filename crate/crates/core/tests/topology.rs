use itertools::Itertools;
use proptest::prelude::*;
use treewalk::topology::{
    build_path, enumerate_port_labelings, enumerate_trees, prufer_decode, random_tree, PathInstance, PortLabeledTree,
};

fn adjacency(t: &PortLabeledTree) -> Vec<Vec<bool>> {
    let n = t.n();
    let mut m = vec![vec![false; n]; n];
    for (a, b) in t.edges() {
        m[a][b] = true;
        m[b][a] = true;
    }
    m
}

fn automorphisms(t: &PortLabeledTree) -> u64 {
    let m = adjacency(t);
    let n = t.n();
    (0..n)
        .permutations(n)
        .filter(|p| (0..n).all(|a| (0..n).all(|b| m[a][b] == m[p[a]][p[b]])))
        .count() as u64
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

#[test]
fn unlabeled_tree_counts() {
    let counts: Vec<usize> = (2..=8).map(|n| enumerate_trees(n).unwrap().len()).collect();
    assert_eq!(counts, vec![1, 1, 2, 3, 6, 11, 23]);
}

/// Each class contributes n!/|Aut| labeled trees; together they must make up
/// all n^(n-2) labeled trees, so no class is missing or repeated.
#[test]
fn classes_partition_the_labeled_trees() {
    for n in 2..=8u64 {
        let total: u64 = enumerate_trees(n as usize)
            .unwrap()
            .iter()
            .map(|t| factorial(n) / automorphisms(t))
            .sum();
        assert_eq!(total, n.pow(n as u32 - 2), "n = {n}");
    }
}

#[test]
fn prufer_sequences_give_distinct_trees() {
    let n = 6;
    let mut seen = std::collections::HashSet::new();
    for seq in (0..n - 2).map(|_| 0..n).multi_cartesian_product() {
        let mut adj = prufer_decode(n, &seq);
        for l in &mut adj {
            l.sort_unstable();
        }
        let t = PortLabeledTree::new(adj.clone()).unwrap();
        assert_eq!(t.edges().len(), n - 1);
        assert!(seen.insert(adj));
    }
    assert_eq!(seen.len(), 6usize.pow(4));
}

#[test]
fn labeling_count_is_product_of_degree_factorials() {
    for n in 2..=6 {
        for t in enumerate_trees(n).unwrap() {
            let expected: u64 = (0..n).map(|v| factorial(t.degree(v) as u64)).product();
            let all: Vec<PortLabeledTree> = enumerate_port_labelings(&t).collect();
            assert_eq!(all.len() as u64, expected);
            assert_eq!(t.labeling_count(), expected);
            let distinct: std::collections::HashSet<_> = all.iter().collect();
            assert_eq!(distinct.len(), all.len());
        }
    }
}

proptest! {
    #[test]
    fn random_trees_are_deterministic_and_serialize(n in 2usize..60, seed in any::<u64>()) {
        let t = random_tree(n, seed).unwrap();
        prop_assert_eq!(&t, &random_tree(n, seed).unwrap());
        prop_assert_eq!(t.edges().len(), n - 1);
        let back = PortLabeledTree::from_json(&t.to_json()).unwrap();
        prop_assert_eq!(&back, &t);
        for v in 0..n {
            for p in 1..=t.degree(v) as u32 {
                let w = t.neighbor(v, p).unwrap();
                let q = t.reverse_port(v, p).unwrap();
                prop_assert_eq!(t.neighbor(w, q), Some(v));
            }
        }
    }

    #[test]
    fn path_orientation_round_trips(orientation in proptest::collection::vec(any::<bool>(), 0..20)) {
        let n = orientation.len() + 2;
        let p = build_path(n, &orientation).unwrap();
        let back = PathInstance::from_tree(p.tree().clone()).unwrap();
        prop_assert_eq!(back.orientation(), &orientation[..]);
        for i in 1..n - 1 {
            prop_assert_eq!(p.tree().neighbor(i, p.left_port(i)), Some(i - 1));
        }
    }
}

#[test]
fn malformed_tree_file_reports_position() {
    let err = PortLabeledTree::from_json("{\"n\": 2,\n \"ports\": [[1], [0]").unwrap_err();
    assert!(err.to_string().contains("line 2"), "{err}");
}
