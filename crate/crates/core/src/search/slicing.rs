use serde::Serialize;

use super::SearchError;
use crate::circuit::TensorNetwork;
use crate::cost::{replay, weighted_cost, BlockPartition, CostError, CostShape, LayerWidths, Replay};
use crate::order::ContractionOrder;
use crate::tensor::IndexId;

/// Largest number of indices `select_slices` will fix before giving up.
pub const MAX_SLICED_INDICES: usize = 48;

/// Internal indices fixed to split one contraction into independent slices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SliceSpec {
    pub sliced_ids: Vec<IndexId>,
    pub n_slices: u64,
    /// `(sliced single cost × n_slices) / unsliced single cost`.
    pub overhead: f64,
}

impl SliceSpec {
    pub fn none() -> Self {
        SliceSpec { sliced_ids: Vec::new(), n_slices: 1, overhead: 1.0 }
    }

    /// Build a spec for explicitly chosen ids, checking they are internal.
    pub fn from_ids(order: &ContractionOrder, tn: &TensorNetwork, ids: Vec<IndexId>) -> Result<Self, SearchError> {
        order.check_network(tn)?;
        for &id in &ids {
            let known = (id.0 as usize) < tn.index_count();
            if !known || tn.outputs().iter().any(|o| o.id == id) {
                return Err(SearchError::NotInternal(id));
            }
        }
        let base: u128 = replay(order, &CostShape::new(tn, &[])).step_costs.iter().sum();
        let sliced: u128 = replay(order, &CostShape::new(tn, &ids)).step_costs.iter().sum();
        let n_slices: u64 = ids
            .iter()
            .map(|id| tn.index_dims()[id.0 as usize] as u64)
            .product();
        let overhead = if base == 0 { 1.0 } else { sliced as f64 * n_slices as f64 / base as f64 };
        Ok(SliceSpec { sliced_ids: ids, n_slices, overhead })
    }

    pub fn is_empty(&self) -> bool {
        self.sliced_ids.is_empty()
    }

    /// Value of every sliced index in slice `s` (first id is most significant).
    pub fn assignment(&self, s: u64, tn: &TensorNetwork) -> Vec<(IndexId, usize)> {
        let mut rest = s;
        let mut out = vec![(IndexId(0), 0); self.sliced_ids.len()];
        for (slot, &id) in out.iter_mut().zip(&self.sliced_ids).rev() {
            let dim = tn.index_dims()[id.0 as usize] as u64;
            *slot = (id, (rest % dim) as usize);
            rest /= dim;
        }
        out
    }

    /// Multi-amplitude cost summed over all slices.
    pub fn multi_cost(
        &self,
        order: &ContractionOrder,
        tn: &TensorNetwork,
        partition: &BlockPartition,
        widths: &LayerWidths,
    ) -> Result<u128, CostError> {
        let costs = replay(order, &CostShape::new(tn, &self.sliced_ids)).step_costs;
        let per_slice = weighted_cost(&partition.block_costs_with(&costs), widths)?;
        Ok(per_slice * self.n_slices as u128)
    }
}

fn intermediate_profile(order: &ContractionOrder, shape: &CostShape, rep: &Replay) -> (usize, u128, usize) {
    // (max rank, max volume, first step reaching the max volume)
    let n = order.n_tensors();
    let mut best = (0usize, 0u128, 0usize);
    for (i, legs) in rep.legs[n..].iter().enumerate() {
        let rank = legs.iter().filter(|&&id| shape.dim(id) > 1).count();
        let vol = shape.volume(legs);
        best.0 = best.0.max(rank);
        if vol > best.1 {
            best.1 = vol;
            best.2 = i;
        }
    }
    best
}

/// Greedily slice indices of the largest intermediate until every step result
/// has rank at most `max_rank`.
///
/// Each round fixes the index (on the current bottleneck tensor) that leaves
/// the smallest largest-intermediate, breaking ties by total sliced cost and
/// then by index id.
pub fn select_slices(order: &ContractionOrder, tn: &TensorNetwork, max_rank: usize) -> Result<SliceSpec, SearchError> {
    order.check_network(tn)?;
    let mut sliced: Vec<IndexId> = Vec::new();
    loop {
        let shape = CostShape::new(tn, &sliced);
        let rep = replay(order, &shape);
        let (rank, _, step) = intermediate_profile(order, &shape, &rep);
        if rank <= max_rank {
            return SliceSpec::from_ids(order, tn, sliced);
        }
        if sliced.len() >= MAX_SLICED_INDICES {
            return Err(SearchError::Infeasible { step, rank, max_rank });
        }
        let bottleneck = &rep.legs[order.n_tensors() + step];
        let mut choice: Option<((u128, u128, u32), IndexId)> = None;
        for &leg in bottleneck {
            let id = IndexId(leg);
            let mut trial = sliced.clone();
            trial.push(id);
            let tshape = CostShape::new(tn, &trial);
            let trep = replay(order, &tshape);
            let (_, vol, _) = intermediate_profile(order, &tshape, &trep);
            let total: u128 = trep.step_costs.iter().sum();
            let key = (vol, total, leg);
            if choice.as_ref().is_none_or(|(k, _)| key < *k) {
                choice = Some((key, id));
            }
        }
        match choice {
            Some((_, id)) => sliced.push(id),
            None => return Err(SearchError::Infeasible { step, rank, max_rank }),
        }
    }
}
