#![allow(dead_code)]

use matnc_core::bitstring::random_bitstrings;
use matnc_core::circuit::random::sycamore_like;
use matnc_core::cost::partition_blocks;
use matnc_core::{build_tensor_network, build_tree, greedy_order, Bitstring, Circuit, ContractionOrder, ReuseTree, TensorNetwork, C64};

pub struct Case {
    pub circuit: Circuit,
    pub tn: TensorNetwork,
    pub order: ContractionOrder,
    pub bitstrings: Vec<Bitstring>,
    pub tree: ReuseTree,
}

pub fn case(n: usize, depth: usize, k: usize, seed: u64) -> Case {
    let circuit = sycamore_like(n, depth, seed);
    let tn = build_tensor_network(&circuit);
    let order = greedy_order(&tn, seed);
    let bitstrings = random_bitstrings(n, k, seed ^ 0x5eed);
    let tree = build_tree(&partition_blocks(&order, &tn).unwrap(), &bitstrings).unwrap();
    Case { circuit, tn, order, bitstrings, tree }
}

/// `|a − b| / |b|`, or `|a − b|` when `b` is zero.
pub fn rel_err(a: C64, b: C64) -> f64 {
    let d = (a - b).norm();
    if b.norm() == 0.0 {
        d
    } else {
        d / b.norm()
    }
}
