//! Block partition of a contraction order, layer widths, and the single-path
//! and multi-amplitude cost functions.
//!
//! Costs count complex multiplications. Per amplitude every output index is
//! fixed before its tensor is contracted, so outputs contribute dim 1 to every
//! step cost; sliced indices likewise contribute dim 1 within a slice.

use std::ops::Range;

use serde::Serialize;
use thiserror::Error;

use crate::bitstring::{dedup, Bitstring};
use crate::circuit::TensorNetwork;
use crate::order::{ContractionOrder, OrderError};
use crate::tensor::IndexId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error("bitstring {index} has length {got}, the network has {expected} outputs")]
    BitstringLength { index: usize, expected: usize, got: usize },
    #[error("no bitstrings given")]
    NoBitstrings,
    #[error("widths cover {got} layers, the partition has {expected}")]
    WidthCount { expected: usize, got: usize },
}

/// Per-amplitude index structure: every original tensor's contracted legs
/// (outputs and sliced indices removed) plus the dimension of each index.
#[derive(Clone, Debug)]
pub struct CostShape {
    legs: Vec<Vec<u32>>,
    dims: Vec<u128>,
}

impl CostShape {
    pub fn new(tn: &TensorNetwork, sliced: &[IndexId]) -> Self {
        let legs = tn
            .tensors()
            .iter()
            .map(|t| {
                let mut l: Vec<u32> = t
                    .indices()
                    .iter()
                    .filter(|ix| !ix.is_output() && !sliced.contains(&ix.id))
                    .map(|ix| ix.id.0)
                    .collect();
                l.sort_unstable();
                l
            })
            .collect();
        let dims = tn.index_dims().iter().map(|&d| d as u128).collect();
        CostShape { legs, dims }
    }

    pub fn legs(&self, t: usize) -> &[u32] {
        &self.legs[t]
    }

    pub fn dim(&self, id: u32) -> u128 {
        self.dims[id as usize]
    }

    pub fn n_tensors(&self) -> usize {
        self.legs.len()
    }

    pub fn volume(&self, legs: &[u32]) -> u128 {
        legs.iter().fold(1u128, |acc, &i| acc.saturating_mul(self.dim(i)))
    }

    /// Multiplications for contracting `a` with `b` and the legs of the result.
    pub fn contract(&self, a: &[u32], b: &[u32]) -> (u128, Vec<u32>) {
        let mut cost = 1u128;
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i] < b[j]) {
                cost = cost.saturating_mul(self.dim(a[i]));
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j] < a[i] {
                cost = cost.saturating_mul(self.dim(b[j]));
                out.push(b[j]);
                j += 1;
            } else {
                cost = cost.saturating_mul(self.dim(a[i]));
                i += 1;
                j += 1;
            }
        }
        (cost, out)
    }
}

/// Symbolic replay of an order: cost and result legs of every step.
#[derive(Clone, Debug)]
pub struct Replay {
    pub step_costs: Vec<u128>,
    /// Legs of every id (originals first, then step results).
    pub legs: Vec<Vec<u32>>,
}

pub fn replay(order: &ContractionOrder, shape: &CostShape) -> Replay {
    let mut legs: Vec<Vec<u32>> = Vec::with_capacity(order.id_count());
    legs.extend((0..shape.n_tensors()).map(|t| shape.legs(t).to_vec()));
    let mut step_costs = Vec::with_capacity(order.len());
    for s in order.steps() {
        let (cost, out) = shape.contract(&legs[s.a], &legs[s.b]);
        step_costs.push(cost);
        legs.push(out);
    }
    Replay { step_costs, legs }
}

/// Consecutive step ranges between bright-tensor consumptions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockPartition {
    /// `blocks[0]` is the trunk; `blocks[l]` for `l ≥ 1` starts where output
    /// `layer_order[l-1]` is first consumed. `n + 1` entries tiling all steps.
    pub blocks: Vec<Range<usize>>,
    /// Output qubits in the order their bright tensors are consumed.
    pub layer_order: Vec<usize>,
    /// Step index opening each layer (`layer_step[l-1]` for layer `l`).
    pub layer_step: Vec<usize>,
    /// Cost of each block with all outputs fixed.
    pub block_costs: Vec<u128>,
}

impl BlockPartition {
    pub fn n_layers(&self) -> usize {
        self.layer_order.len()
    }

    pub fn single_cost(&self) -> u128 {
        self.block_costs.iter().sum()
    }

    /// Block costs re-evaluated with extra indices fixed (for slicing).
    pub fn block_costs_with(&self, step_costs: &[u128]) -> Vec<u128> {
        self.blocks.iter().map(|r| step_costs[r.clone()].iter().sum()).collect()
    }
}

/// Split `order` into blocks at each first consumption of a bright tensor.
///
/// Outputs opened by the same step get consecutive layers in ascending qubit
/// order; the steps go to the last of those layers, the earlier ones get empty
/// blocks, so every step runs with all the outputs it touches already fixed.
pub fn partition_blocks(order: &ContractionOrder, tn: &TensorNetwork) -> Result<BlockPartition, CostError> {
    order.check_network(tn)?;
    let n_steps = order.len();
    let mut layer_order = Vec::with_capacity(tn.n_qubits());
    let mut layer_step = Vec::with_capacity(tn.n_qubits());

    if order.is_empty() {
        layer_order.extend(tn.outputs_of(0));
        layer_step.resize(layer_order.len(), 0);
    }
    for (i, s) in order.steps().iter().enumerate() {
        let mut opened: Vec<usize> = [s.a, s.b]
            .iter()
            .filter(|&&id| id < tn.len() && tn.is_bright(id))
            .flat_map(|&id| tn.outputs_of(id))
            .collect();
        opened.sort_unstable();
        layer_step.extend(std::iter::repeat_n(i, opened.len()));
        layer_order.extend(opened);
    }
    debug_assert_eq!(layer_order.len(), tn.n_qubits());

    let mut blocks = Vec::with_capacity(layer_order.len() + 1);
    let first = layer_step.first().copied().unwrap_or(n_steps);
    blocks.push(0..first);
    for l in 0..layer_step.len() {
        let end = layer_step.get(l + 1).copied().unwrap_or(n_steps);
        blocks.push(layer_step[l]..end);
    }

    let costs = replay(order, &CostShape::new(tn, &[])).step_costs;
    let block_costs = blocks.iter().map(|r| costs[r.clone()].iter().sum()).collect();
    Ok(BlockPartition { blocks, layer_order, layer_step, block_costs })
}

/// Number of reuse-tree edges entering each layer: `w[l]` counts distinct
/// length-`l` prefixes (in layer order), so `w[0] = 1` and `w[n]` is the
/// number of distinct strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LayerWidths {
    pub w: Vec<u64>,
    /// Distinct strings (equals `w[n]` for exact widths).
    pub k: u64,
}

pub fn layer_widths(partition: &BlockPartition, bitstrings: &[Bitstring]) -> Result<LayerWidths, CostError> {
    widths_for_order(&partition.layer_order, bitstrings)
}

/// Exact widths for an arbitrary layer order.
pub fn widths_for_order(layer_order: &[usize], bitstrings: &[Bitstring]) -> Result<LayerWidths, CostError> {
    let n = layer_order.len();
    if bitstrings.is_empty() {
        return Err(CostError::NoBitstrings);
    }
    if let Some((index, b)) = bitstrings.iter().enumerate().find(|(_, b)| b.len() != n) {
        return Err(CostError::BitstringLength { index, expected: n, got: b.len() });
    }
    let mut keys: Vec<u128> = bitstrings.iter().map(|b| b.packed_in_order(layer_order)).collect();
    keys.sort_unstable();
    keys.dedup();

    // a new length-l prefix starts wherever adjacent sorted keys share fewer than l bits
    let mut starts_below = vec![0u64; n + 1];
    for pair in keys.windows(2) {
        let lcp = ((pair[0] ^ pair[1]).leading_zeros() as usize).min(n);
        starts_below[lcp] += 1;
    }
    let mut w = vec![1u64; n + 1];
    let mut acc = 0;
    for l in 1..=n {
        acc += starts_below[l - 1];
        w[l] = 1 + acc;
    }
    Ok(LayerWidths { w, k: keys.len() as u64 })
}

/// Expected number of distinct prefixes for `k` uniform random `n`-bit strings.
pub fn expected_widths(k: u64, n: usize) -> LayerWidths {
    let k = k.max(1);
    let w = (0..=n)
        .map(|l| {
            let cells = 2f64.powi(l as i32);
            let miss = (k as f64 * (-1.0 / cells).ln_1p()).exp();
            let e = if l == 0 { 1.0 } else { cells * (1.0 - miss) };
            (e.round() as u64).clamp(1, k)
        })
        .collect();
    LayerWidths { w, k }
}

/// Single-path cost: every step once, outputs fixed.
pub fn single_cost(order: &ContractionOrder, tn: &TensorNetwork) -> u128 {
    replay(order, &CostShape::new(tn, &[])).step_costs.iter().sum()
}

/// Multi-amplitude cost: block `l` runs once per edge entering layer `l + 1`.
pub fn multi_cost(partition: &BlockPartition, widths: &LayerWidths) -> Result<u128, CostError> {
    weighted_cost(&partition.block_costs, widths)
}

pub fn weighted_cost(block_costs: &[u128], widths: &LayerWidths) -> Result<u128, CostError> {
    if widths.w.len() != block_costs.len() {
        return Err(CostError::WidthCount { expected: block_costs.len(), got: widths.w.len() });
    }
    Ok(block_costs
        .iter()
        .zip(&widths.w)
        .fold(0u128, |acc, (&c, &w)| acc.saturating_add(c.saturating_mul(w as u128))))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostReport {
    /// Single-path cost.
    pub single_cost: u128,
    pub block_costs: Vec<u128>,
    /// Multi-amplitude cost with optimal reuse.
    pub multi_cost: u128,
    /// `k` independent single-amplitude contractions.
    pub linear_baseline: u128,
    /// `linear_baseline / multi_cost`.
    pub reuse_ratio: f64,
    pub k: u64,
    pub widths: Vec<u64>,
    pub layer_order: Vec<usize>,
}

impl CostReport {
    pub fn new(partition: &BlockPartition, widths: &LayerWidths) -> Result<Self, CostError> {
        let single = partition.single_cost();
        let multi = multi_cost(partition, widths)?;
        let linear = single.saturating_mul(widths.k as u128);
        let reuse_ratio = if multi == 0 { 1.0 } else { linear as f64 / multi as f64 };
        Ok(CostReport {
            single_cost: single,
            block_costs: partition.block_costs.clone(),
            multi_cost: multi,
            linear_baseline: linear,
            reuse_ratio,
            k: widths.k,
            widths: widths.w.clone(),
            layer_order: partition.layer_order.clone(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cost report serializes")
    }
}

/// Where layer widths come from.
#[derive(Clone, Debug, PartialEq)]
pub enum WidthsSource {
    /// Exact prefix counts of these strings.
    Exact(Vec<Bitstring>),
    /// Expected prefix counts of `k` uniform random strings.
    Model { k: u64 },
}

impl WidthsSource {
    /// Exact source over the distinct strings of `list`.
    pub fn exact(list: &[Bitstring]) -> Self {
        WidthsSource::Exact(dedup(list).0)
    }

    pub fn widths(&self, layer_order: &[usize]) -> Result<LayerWidths, CostError> {
        match self {
            WidthsSource::Exact(list) => widths_for_order(layer_order, list),
            WidthsSource::Model { k } => Ok(expected_widths(*k, layer_order.len())),
        }
    }
}

/// Full cost report for an order.
pub fn cost_report(
    order: &ContractionOrder,
    tn: &TensorNetwork,
    source: &WidthsSource,
) -> Result<CostReport, CostError> {
    let partition = partition_blocks(order, tn)?;
    let widths = source.widths(&partition.layer_order)?;
    CostReport::new(&partition, &widths)
}
