use std::collections::BTreeSet;

use bergspec::lattice::{
    coarsen_label, enumerate_labels, enumerate_multi_indices, fiber, fiber_dimension, group_norms,
    homogeneous_dimension, partition_preceq, truncation_size, Partition,
};
use proptest::prelude::*;

#[test]
fn truncation_counts_match_homogeneous_sums() {
    for n in 1..=4 {
        for cap in 0..=10u32 {
            let total: u64 = (0..=cap)
                .map(|l| homogeneous_dimension(n, l).unwrap())
                .sum();
            let listed = enumerate_multi_indices(n, cap).unwrap();
            assert_eq!(listed.len() as u64, total, "n={n} cap={cap}");
            assert_eq!(truncation_size(n, cap).unwrap(), total);
        }
    }
}

#[test]
fn enumeration_is_sorted_and_unique() {
    let listed = enumerate_multi_indices(3, 6).unwrap();
    assert!(listed.windows(2).all(|w| w[0] < w[1]));
    assert!(listed.windows(2).all(|w| w[0].degree() <= w[1].degree()));
}

#[test]
fn fibers_partition_the_truncation() {
    for n in 1..=4 {
        for k in Partition::all_of(n) {
            let cap = 5;
            let mut seen = BTreeSet::new();
            for s in enumerate_labels(k.m(), cap) {
                let f = fiber(&k, &s, cap).unwrap();
                let expected: u64 = k
                    .blocks()
                    .iter()
                    .zip(s.entries())
                    .map(|(&kj, &sj)| homogeneous_dimension(kj, sj).unwrap())
                    .product();
                assert_eq!(f.len() as u64, expected);
                assert_eq!(fiber_dimension(&k, &s).unwrap(), expected);
                for alpha in f {
                    assert_eq!(group_norms(&alpha, &k).unwrap(), s);
                    assert!(seen.insert(alpha), "fibers overlap for {k}");
                }
            }
            let all: BTreeSet<_> = enumerate_multi_indices(n, cap)
                .unwrap()
                .into_iter()
                .collect();
            assert_eq!(seen, all, "fibers of {k} do not cover the truncation");
        }
    }
}

#[test]
fn refinement_order_is_a_partial_order() {
    for n in 1..=6 {
        let parts = Partition::all_of(n);
        for a in &parts {
            assert!(partition_preceq(a, a).unwrap());
            for b in &parts {
                let ab = partition_preceq(a, b).unwrap();
                let ba = partition_preceq(b, a).unwrap();
                if ab && ba {
                    assert_eq!(a, b);
                }
                for c in &parts {
                    if ab && partition_preceq(b, c).unwrap() {
                        assert!(partition_preceq(a, c).unwrap(), "{a} {b} {c}");
                    }
                }
            }
        }
    }
}

#[test]
fn coarse_fibers_are_unions_of_fine_fibers() {
    let cap = 4;
    for n in 2..=4 {
        let parts = Partition::all_of(n);
        for coarse in &parts {
            for fine in &parts {
                if !partition_preceq(coarse, fine).unwrap() {
                    continue;
                }
                for s in enumerate_labels(coarse.m(), cap) {
                    let big: BTreeSet<_> = fiber(coarse, &s, cap).unwrap().into_iter().collect();
                    let mut union = BTreeSet::new();
                    for t in enumerate_labels(fine.m(), cap) {
                        if coarsen_label(&t, fine, coarse).unwrap() == s {
                            for alpha in fiber(fine, &t, cap).unwrap() {
                                assert!(union.insert(alpha));
                            }
                        }
                    }
                    assert_eq!(big, union);
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn group_norms_sum_to_degree(entries in prop::collection::vec(0u32..7, 1..6), cut in 0usize..6) {
        let n = entries.len();
        let blocks = if cut == 0 || cut >= n { vec![n] } else { vec![cut, n - cut] };
        let k = Partition::new(blocks).unwrap();
        let alpha = bergspec::lattice::MultiIndex::new(entries);
        let s = group_norms(&alpha, &k).unwrap();
        prop_assert_eq!(s.total(), alpha.degree());
        prop_assert_eq!(s.len(), k.m());
    }
}
