//! Reuse tree over the requested bitstrings and the static depth-first
//! memory plan for traversing it.

mod memory;
mod tree;

use serde::Serialize;
use thiserror::Error;

use crate::cost::{CostError, CostReport};

pub use memory::{plan_memory, plan_memory_sliced, CacheRecord, MemoryPlan, BYTES_PER_ELEMENT};
pub use tree::{build_tree, coalesce, Edge, ReuseTree, Segment, TreeNode};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("no bitstrings given")]
    NoBitstrings,
    #[error("bitstring of length {got} given for a {expected}-qubit network")]
    BitstringLength { expected: usize, got: usize },
    #[error("reuse tree was not built from this order's block partition")]
    Mismatch,
    #[error(transparent)]
    Cost(#[from] CostError),
}

/// Machine-readable overview of a tree and its memory plan.
#[derive(Clone, Debug, Serialize)]
pub struct PlanSummary {
    pub n_qubits: usize,
    pub requested: usize,
    pub distinct: usize,
    pub nodes: usize,
    pub edges: usize,
    pub nodes_per_depth: Vec<usize>,
    pub widths: Vec<u64>,
    pub layer_order: Vec<usize>,
    pub single_cost: u128,
    pub multi_cost: u128,
    pub reuse_ratio: f64,
    pub peak_elements: u128,
    pub peak_bytes: u128,
    pub single_amplitude_peak: u128,
    pub breadth_first_peak: u128,
    pub memory_ratio: f64,
    pub breadth_first_ratio: f64,
}

impl PlanSummary {
    pub fn new(tree: &ReuseTree, plan: &MemoryPlan, report: &CostReport) -> Self {
        PlanSummary {
            n_qubits: tree.n_layers(),
            requested: tree.requested().len(),
            distinct: tree.distinct().len(),
            nodes: tree.nodes().len(),
            edges: tree.edge_count(),
            nodes_per_depth: tree.nodes_per_depth(),
            widths: tree.widths(),
            layer_order: tree.partition().layer_order.clone(),
            single_cost: report.single_cost,
            multi_cost: report.multi_cost,
            reuse_ratio: report.reuse_ratio,
            peak_elements: plan.peak_elements,
            peak_bytes: plan.peak_bytes(),
            single_amplitude_peak: plan.single_amplitude_peak,
            breadth_first_peak: plan.breadth_first_peak,
            memory_ratio: plan.ratio(),
            breadth_first_ratio: plan.breadth_first_ratio(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}
