mod common;

use common::case;
use matnc_core::bitstring::{parse_bitstrings, random_bitstrings};
use matnc_core::cost::{layer_widths, partition_blocks};
use matnc_core::exec::run_multi;
use matnc_core::reuse::{plan_memory, plan_memory_sliced, PlanError};
use matnc_core::{build_tree, coalesce, select_slices, Bitstring, ExecOptions, ReuseTree, SliceSpec};
use proptest::prelude::*;

/// Bitstring spelled by the segments from the root to every leaf.
fn leaf_paths(tree: &ReuseTree, n: usize) -> Vec<(usize, Bitstring)> {
    let mut out = Vec::new();
    let mut stack = vec![(tree.root(), Bitstring::zeros(n), 0usize)];
    while let Some((node, bits, fixed)) = stack.pop() {
        let nd = &tree.nodes()[node];
        if let Some(leaf) = nd.leaf {
            assert_eq!(fixed, n);
            out.push((leaf, bits));
        }
        for e in &nd.children {
            let mut b = bits;
            for s in &e.segments {
                b.set(s.qubit, s.value);
            }
            stack.push((e.child, b, fixed + e.segments.len()));
        }
    }
    out
}

#[test]
fn paths_spell_requested_bitstrings() {
    let c = case(9, 6, 60, 4);
    for tree in [c.tree.clone(), coalesce(&c.tree)] {
        let paths = leaf_paths(&tree, 9);
        assert_eq!(paths.len(), tree.distinct().len());
        for (leaf, bits) in paths {
            assert_eq!(bits, tree.distinct()[leaf]);
        }
        for (i, &r) in tree.requested().iter().enumerate() {
            assert_eq!(tree.distinct()[r], c.bitstrings[i]);
        }
    }
}

#[test]
fn tree_widths_match_layer_widths() {
    for seed in 0..8 {
        let c = case(8, 5, 1 + 17 * seed as usize, seed);
        let p = partition_blocks(&c.order, &c.tn).unwrap();
        assert_eq!(c.tree.widths(), layer_widths(&p, &c.bitstrings).unwrap().w);
    }
}

#[test]
fn coalesce_merges_chains() {
    let c = case(4, 4, 1, 2);
    let list = parse_bitstrings("0000\n0001\n1111", 4).unwrap();
    let p = partition_blocks(&c.order, &c.tn).unwrap();
    let tree = build_tree(&p, &list).unwrap();
    let merged = coalesce(&tree);
    assert_eq!(coalesce(&merged), merged);
    assert_eq!(merged.widths(), tree.widths());
    for (i, n) in merged.nodes().iter().enumerate() {
        if i != merged.root() {
            assert!(n.children.len() != 1 || n.leaf.is_some());
        }
    }
    let single = build_tree(&p, &list[..1]).unwrap();
    let path = coalesce(&single);
    assert_eq!(path.nodes().len(), 2);
    assert_eq!(path.nodes()[0].children[0].segments.len(), 4);
}

#[test]
fn one_bitstring_peak_is_single_peak() {
    for seed in 0..6 {
        let c = case(8, 6, 1, seed);
        let plan = plan_memory(&c.tree, &c.tn, &c.order).unwrap();
        assert_eq!(plan.peak_elements, plan.single_amplitude_peak);
        assert_eq!(plan.breadth_first_peak, plan.peak_elements);
        assert!(plan.cache_records.is_empty());
    }
}

#[test]
fn last_layer_branch_stays_within_one_cached_frontier() {
    for seed in 0..6 {
        let c = case(8, 6, 1, seed);
        let p = partition_blocks(&c.order, &c.tn).unwrap();
        let mut other = c.bitstrings[0];
        let q = *p.layer_order.last().unwrap();
        other.set(q, 1 - other.get(q));
        let tree = build_tree(&p, &[c.bitstrings[0], other]).unwrap();
        let plan = plan_memory(&tree, &c.tn, &c.order).unwrap();
        assert_eq!(plan.cache_records.len(), 1);
        let cached = plan.cache_records[0].elements;
        assert!(plan.single_amplitude_peak <= plan.peak_elements);
        assert!(plan.peak_elements <= plan.single_amplitude_peak + cached, "seed {seed}: {plan:?}");
        let set = run_multi::<f64>(&c.tn, &c.order, &tree, &SliceSpec::none(), &ExecOptions::default()).unwrap();
        assert_eq!(set.meta.peak_live_elements, plan.peak_elements);
    }
}

#[test]
fn measured_peak_matches_plan_at_ten_qubits() {
    let c = case(10, 8, 256, 21);
    let plan = plan_memory(&c.tree, &c.tn, &c.order).unwrap();
    let set = run_multi::<f64>(&c.tn, &c.order, &c.tree, &SliceSpec::none(), &ExecOptions::default()).unwrap();
    assert_eq!(set.meta.peak_live_elements, plan.peak_elements);
    assert!(plan.is_lossless());
    assert!(plan.cache_records.iter().all(|r| r.reads >= 2));
    assert_eq!(plan.peak_bytes(), plan.peak_elements * 16);
}

#[test]
fn sliced_plan_matches_sliced_run() {
    let c = case(10, 10, 40, 8);
    let spec = select_slices(&c.order, &c.tn, 6).unwrap();
    assert!(spec.n_slices > 1);
    let plan = plan_memory_sliced(&c.tree, &c.tn, &c.order, &spec).unwrap();
    let set = run_multi::<f64>(&c.tn, &c.order, &c.tree, &spec, &ExecOptions::default()).unwrap();
    assert_eq!(set.meta.peak_live_elements, plan.peak_elements);
}

#[test]
fn tree_from_another_order_is_rejected() {
    let a = case(6, 4, 5, 1);
    let b = case(6, 4, 5, 2);
    assert!(matches!(plan_memory(&a.tree, &b.tn, &b.order), Err(PlanError::Mismatch) | Err(PlanError::Cost(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn widths_are_bounded_and_plans_lossless(seed in 0u64..200, k in 1usize..80) {
        let c = case(7, 4, 1, seed);
        let list = random_bitstrings(7, k, seed.wrapping_mul(31));
        let p = partition_blocks(&c.order, &c.tn).unwrap();
        let tree = build_tree(&p, &list).unwrap();
        let w = tree.widths();
        let distinct = tree.distinct().len() as u64;
        prop_assert_eq!(w[0], 1);
        for l in 0..7 {
            prop_assert!(w[l] <= w[l + 1]);
            prop_assert!(w[l + 1] <= (1u64 << (l + 1)).min(distinct));
        }
        let plan = plan_memory(&tree, &c.tn, &c.order).unwrap();
        prop_assert!(plan.is_lossless());
        prop_assert!(plan.breadth_first_peak >= plan.peak_elements);
        prop_assert!(plan.peak_elements >= plan.single_amplitude_peak);
        if tree.is_path() {
            prop_assert_eq!(plan.breadth_first_peak, plan.peak_elements);
        }
    }
}
