mod common;

use matnc_core::bitstring::random_bitstrings;
use matnc_core::circuit::random::sycamore_like;
use matnc_core::cost::{cost_report, replay, single_cost, CostShape, WidthsSource};
use matnc_core::exec::run_single;
use matnc_core::search::SearchError;
use matnc_core::{
    anneal_order, build_tensor_network, greedy_order, parse_circuit, select_slices, ContractionOrder, ExecOptions, Loss,
    SearchConfig, WidthsMode,
};
use proptest::prelude::*;

fn max_rank(order: &ContractionOrder, shape: &CostShape) -> usize {
    let rep = replay(order, shape);
    rep.legs[order.n_tensors()..]
        .iter()
        .map(|l| l.iter().filter(|&&id| shape.dim(id) > 1).count())
        .max()
        .unwrap_or(0)
}

#[test]
fn greedy_orders_are_valid() {
    let tn = build_tensor_network(&sycamore_like(8, 8, 1));
    let order = greedy_order(&tn, 0);
    assert_eq!(order.len(), tn.len() - 1);
    let mut used = vec![false; order.id_count()];
    for s in order.steps() {
        assert!(!used[s.a] && !used[s.b]);
        used[s.a] = true;
        used[s.b] = true;
    }
    assert_eq!(used.iter().filter(|&&u| !u).count(), 1);
    assert_eq!(greedy_order(&tn, 0), order);
}

#[test]
fn greedy_two_tensor_network() {
    let tn = build_tensor_network(&parse_circuit("2\n").unwrap());
    assert_eq!(greedy_order(&tn, 0), ContractionOrder::from_pairs(2, &[(0, 1)]).unwrap());
}

#[test]
fn greedy_chain_beats_left_to_right() {
    let tn = build_tensor_network(&parse_circuit("1\n0 h 0\n1 t 0\n2 h 0\n3 x_1_2 0").unwrap());
    let naive = ContractionOrder::from_pairs(5, &[(0, 1), (5, 2), (6, 3), (7, 4)]).unwrap();
    assert!(single_cost(&greedy_order(&tn, 0), &tn) <= single_cost(&naive, &tn));
}

#[test]
fn multi_loss_beats_single_loss_at_ten_qubits() {
    let tn = build_tensor_network(&sycamore_like(10, 8, 10));
    let bs = random_bitstrings(10, 512, 3);
    let source = WidthsSource::exact(&bs);
    let init = greedy_order(&tn, 0);
    let mut multi = Vec::new();
    let mut single = Vec::new();
    for seed in 0..10 {
        for (loss, dest) in [(Loss::Multi, &mut multi), (Loss::Single, &mut single)] {
            let cfg = SearchConfig { loss, budget: 20_000, seed, ..SearchConfig::default() };
            let (order, _) = anneal_order(&tn, &init, &cfg, Some(&bs)).unwrap();
            dest.push(cost_report(&order, &tn, &source).unwrap().multi_cost);
        }
    }
    multi.sort_unstable();
    single.sort_unstable();
    assert!(multi[4] + multi[5] <= single[4] + single[5], "multi {multi:?} single {single:?}");
}

#[test]
fn model_widths_need_no_bitstrings() {
    let tn = build_tensor_network(&sycamore_like(6, 4, 2));
    let init = greedy_order(&tn, 0);
    let cfg = SearchConfig { widths: WidthsMode::Model { k: 64 }, budget: 300, ..SearchConfig::default() };
    let (_, report) = anneal_order(&tn, &init, &cfg, None).unwrap();
    assert!(report.reuse_ratio >= 1.0);
}

#[test]
fn one_index_splits_a_unique_bottleneck() {
    let mut found = 0;
    for seed in 0..60 {
        let tn = build_tensor_network(&sycamore_like(5 + seed as usize % 4, 3 + seed as usize % 5, seed));
        let order = greedy_order(&tn, 0);
        let shape = CostShape::new(&tn, &[]);
        let rep = replay(&order, &shape);
        let ranks: Vec<usize> = rep.legs[order.n_tensors()..]
            .iter()
            .map(|l| l.iter().filter(|&&id| shape.dim(id) > 1).count())
            .collect();
        let r = *ranks.iter().max().unwrap();
        if r == 0 || ranks.iter().filter(|&&x| x == r).count() != 1 {
            continue;
        }
        let spec = select_slices(&order, &tn, r - 1).unwrap();
        assert_eq!(spec.sliced_ids.len(), 1, "seed {seed}");
        assert_eq!(spec.n_slices, 2);
        assert!(spec.overhead >= 1.0);
        found += 1;
    }
    assert!(found > 0);
}

#[test]
fn twelve_qubit_slices_respect_rank_bound() {
    let tn = build_tensor_network(&sycamore_like(12, 16, 5));
    let order = greedy_order(&tn, 0);
    let spec = select_slices(&order, &tn, 14).unwrap();
    assert!(max_rank(&order, &CostShape::new(&tn, &spec.sliced_ids)) <= 14);
    let bs = random_bitstrings(12, 1, 0);
    let (_, inst) = run_single::<f64>(&tn, &order, &bs[0], &spec, &ExecOptions::default()).unwrap();
    assert!(inst.max_intermediate_rank <= 14);

    let tight = max_rank(&order, &CostShape::new(&tn, &[])).saturating_sub(3);
    let spec = select_slices(&order, &tn, tight).unwrap();
    assert!(spec.n_slices >= 2);
    let (_, inst) = run_single::<f64>(&tn, &order, &bs[0], &spec, &ExecOptions::default()).unwrap();
    assert!(inst.max_intermediate_rank <= tight);
}

#[test]
fn unreachable_rank_is_infeasible() {
    let tn = build_tensor_network(&sycamore_like(12, 16, 5));
    let order = greedy_order(&tn, 0);
    match select_slices(&order, &tn, 0) {
        Err(SearchError::Infeasible { max_rank: 0, .. }) => {}
        other => panic!("expected infeasible, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn annealing_never_returns_worse_and_is_reproducible(seed in any::<u64>(), multi in any::<bool>()) {
        let tn = build_tensor_network(&sycamore_like(7, 5, seed % 50));
        let init = greedy_order(&tn, 0);
        let bs = random_bitstrings(7, 20, seed);
        let loss = if multi { Loss::Multi } else { Loss::Single };
        let cfg = SearchConfig { loss, budget: 400, seed, ..SearchConfig::default() };
        let (a, ra) = anneal_order(&tn, &init, &cfg, Some(&bs)).unwrap();
        let (b, _) = anneal_order(&tn, &init, &cfg, Some(&bs)).unwrap();
        prop_assert_eq!(&a, &b);
        let base = cost_report(&init, &tn, &WidthsSource::exact(&bs)).unwrap();
        if multi {
            prop_assert!(ra.multi_cost <= base.multi_cost);
        } else {
            prop_assert!(ra.single_cost <= base.single_cost);
        }
    }
}
