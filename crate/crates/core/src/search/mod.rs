//! Contraction-order search under the single-path or multi-amplitude loss,
//! and slice selection over a found order.

mod anneal;
mod greedy;
mod slicing;
mod tree;

use thiserror::Error;

use crate::order::OrderError;
use crate::tensor::IndexId;

pub use anneal::anneal_order;
pub use greedy::greedy_order;
pub use slicing::{select_slices, SliceSpec, MAX_SLICED_INDICES};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Loss {
    /// Cost of one amplitude.
    Single,
    /// Cost of all requested amplitudes with reuse.
    Multi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WidthsMode {
    /// Prefix counts of the supplied bitstrings.
    Exact,
    /// Expected prefix counts of `k` uniform random bitstrings.
    Model { k: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub loss: Loss,
    pub widths: WidthsMode,
    /// Number of proposed moves.
    pub budget: usize,
    pub seed: u64,
    /// Starting temperature; `None` means 2% of the initial loss.
    pub initial_temperature: Option<f64>,
    /// Geometric decay factor per move, in `(0, 1)`.
    pub decay: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            loss: Loss::Multi,
            widths: WidthsMode::Exact,
            budget: 20_000,
            seed: 0,
            initial_temperature: None,
            decay: 0.999,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error("exact widths need bitstrings")]
    MissingBitstrings,
    #[error("bitstring of length {got} given for a {expected}-qubit network")]
    BitstringLength { expected: usize, got: usize },
    #[error("cannot reach rank {max_rank}: bottleneck step {step} still has rank {rank} after slicing {MAX_SLICED_INDICES} indices")]
    Infeasible { step: usize, rank: usize, max_rank: usize },
    #[error("index {0} is not an internal index of the network")]
    NotInternal(IndexId),
}
