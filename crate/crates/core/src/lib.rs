//! Exact multi-amplitude simulation of quantum circuits by tensor-network
//! contraction with reuse of shared intermediate results.
//!
//! Pipeline: [`circuit::parse_circuit`] → [`build_tensor_network`] → an order
//! from [`search`] → a [`reuse::ReuseTree`] over the requested bitstrings →
//! [`exec::run_multi`] or [`exec::run_parallel`]. [`cost`] predicts the exact
//! multiplication count of every run, [`reuse::plan_memory`] its exact memory
//! high-water mark, and [`oracle`] provides statevector ground truth.

pub mod bitstring;
pub mod circuit;
pub mod cost;
pub mod exec;
pub mod io;
pub mod oracle;
pub mod order;
pub mod reuse;
pub mod search;
pub mod tensor;
pub mod xeb;

pub use bitstring::Bitstring;
pub use circuit::{build_tensor_network, parse_circuit, Circuit, Gate, GateKind, TensorNetwork};
pub use cost::{cost_report, BlockPartition, CostReport, LayerWidths, WidthsSource};
pub use exec::{AmplitudeSet, ExecError, ExecOptions, Instrumentation};
pub use order::{ContractionOrder, Step};
pub use reuse::{build_tree, coalesce, plan_memory, MemoryPlan, ReuseTree};
pub use search::{anneal_order, greedy_order, select_slices, Loss, SearchConfig, SliceSpec, WidthsMode};
pub use tensor::{DenseTensor, Index, IndexId, IndexTag, C64};
