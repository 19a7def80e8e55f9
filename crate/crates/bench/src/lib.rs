//! Shared fixtures for the engine benchmarks.

use matnc_core::bitstring::random_bitstrings;
use matnc_core::circuit::random::sycamore_like;
use matnc_core::{build_tensor_network, build_tree, greedy_order, Bitstring, ContractionOrder, ReuseTree, TensorNetwork};

/// A random circuit network, its greedy order, and the reuse tree for `k`
/// random bitstrings.
pub struct Instance {
    pub tn: TensorNetwork,
    pub order: ContractionOrder,
    pub bitstrings: Vec<Bitstring>,
    pub tree: ReuseTree,
}

pub fn instance(n: usize, depth: usize, k: usize, seed: u64) -> Instance {
    let tn = build_tensor_network(&sycamore_like(n, depth, seed));
    let order = greedy_order(&tn, 0);
    let bitstrings = random_bitstrings(n, k, seed);
    let partition = matnc_core::cost::partition_blocks(&order, &tn).expect("greedy order fits its network");
    let tree = build_tree(&partition, &bitstrings).expect("bitstrings match the network");
    Instance { tn, order, bitstrings, tree }
}
