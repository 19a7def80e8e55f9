use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tree::ContractionTree;
use super::{Loss, SearchConfig, SearchError, WidthsMode};
use crate::bitstring::{dedup, Bitstring};
use crate::circuit::TensorNetwork;
use crate::cost::{expected_widths, partition_blocks, weighted_cost, widths_for_order, CostReport, CostShape, LayerWidths};
use crate::order::ContractionOrder;

/// Loss evaluation with widths memoized per layer order.
struct Evaluator<'a> {
    tn: &'a TensorNetwork,
    loss: Loss,
    bitstrings: Option<Vec<Bitstring>>,
    model_k: u64,
    memo: HashMap<Vec<usize>, LayerWidths>,
}

impl<'a> Evaluator<'a> {
    fn widths(&mut self, layer_order: &[usize]) -> LayerWidths {
        if let Some(w) = self.memo.get(layer_order) {
            return w.clone();
        }
        let w = match &self.bitstrings {
            Some(list) => widths_for_order(layer_order, list).expect("bitstring lengths checked up front"),
            None => expected_widths(self.model_k, layer_order.len()),
        };
        self.memo.insert(layer_order.to_vec(), w.clone());
        w
    }

    fn loss(&mut self, order: &ContractionOrder) -> u128 {
        let p = partition_blocks(order, self.tn).expect("orders come from this network");
        match self.loss {
            Loss::Single => p.single_cost(),
            Loss::Multi => {
                let w = self.widths(&p.layer_order);
                weighted_cost(&p.block_costs, &w).expect("widths match partition")
            }
        }
    }

    fn report(&mut self, order: &ContractionOrder) -> CostReport {
        let p = partition_blocks(order, self.tn).expect("orders come from this network");
        let w = self.widths(&p.layer_order);
        CostReport::new(&p, &w).expect("widths match partition")
    }
}

/// Simulated annealing over contraction trees, minimizing the configured loss.
///
/// Moves are subtree rotations and leaf reattachments, chosen with equal
/// probability. Uphill moves are accepted with probability `exp(-Δ/T)` and the
/// temperature decays geometrically per move. Returns the best order seen
/// (possibly `init` itself) with its cost report.
pub fn anneal_order(
    tn: &TensorNetwork,
    init: &ContractionOrder,
    cfg: &SearchConfig,
    bitstrings: Option<&[Bitstring]>,
) -> Result<(ContractionOrder, CostReport), SearchError> {
    init.check_network(tn)?;
    let (bitstrings, model_k) = match cfg.widths {
        WidthsMode::Exact => {
            let list = bitstrings.ok_or(SearchError::MissingBitstrings)?;
            if list.is_empty() {
                return Err(SearchError::MissingBitstrings);
            }
            if let Some(b) = list.iter().find(|b| b.len() != tn.n_qubits()) {
                return Err(SearchError::BitstringLength { expected: tn.n_qubits(), got: b.len() });
            }
            (Some(dedup(list).0), 0)
        }
        WidthsMode::Model { k } => (None, k.max(1)),
    };
    let mut eval = Evaluator { tn, loss: cfg.loss, bitstrings, model_k, memo: HashMap::new() };

    let init_loss = eval.loss(init);
    let mut best = init.clone();
    let mut best_loss = init_loss;
    if cfg.budget == 0 {
        let report = eval.report(&best);
        return Ok((best, report));
    }

    let shape = CostShape::new(tn, &[]);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tree = ContractionTree::from_order(init);
    let start = tree.linearize(tn, &shape);
    let mut current = eval.loss(&start);
    if current < best_loss {
        best_loss = current;
        best = start;
    }

    let mut temperature = cfg.initial_temperature.unwrap_or(0.02 * init_loss as f64);
    for _ in 0..cfg.budget {
        let mut candidate = tree.clone();
        let moved = if rng.gen_bool(0.5) {
            candidate.rotate(&mut rng)
        } else {
            candidate.reattach(&mut rng)
        };
        if moved {
            let order = candidate.linearize(tn, &shape);
            let loss = eval.loss(&order);
            let accept = loss <= current || {
                let delta = (loss - current) as f64;
                temperature > 0.0 && rng.gen::<f64>() < (-delta / temperature).exp()
            };
            if accept {
                tree = candidate;
                current = loss;
                if loss < best_loss {
                    best_loss = loss;
                    best = order;
                }
            }
        }
        temperature *= cfg.decay;
    }
    let report = eval.report(&best);
    Ok((best, report))
}
