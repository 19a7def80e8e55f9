//! Pairwise contraction orders in single-assignment form.
//!
//! Original tensors have ids `0..T`; step `i` consumes two live ids and
//! produces id `T + i`. A valid order has exactly `T - 1` steps and consumes
//! every id except the last result exactly once.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::TensorNetwork;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Step {
    pub a: usize,
    pub b: usize,
    pub out: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrderError {
    #[error("order has {got} steps, a {tensors}-tensor network needs {expected}")]
    StepCount { tensors: usize, expected: usize, got: usize },
    #[error("step {step}: operand {id} does not exist yet")]
    UnknownOperand { step: usize, id: usize },
    #[error("step {step}: operand {id} was already consumed")]
    Reused { step: usize, id: usize },
    #[error("step {step}: result id must be {expected}, got {got}")]
    ResultId { step: usize, expected: usize, got: usize },
    #[error("order was made for {expected} tensors, network has {got}")]
    TensorCount { expected: usize, got: usize },
    #[error("order fingerprint {found} does not match network {expected}")]
    Fingerprint { expected: String, found: String },
    #[error("malformed order document: {0}")]
    Json(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ContractionOrder {
    n_tensors: usize,
    steps: Vec<Step>,
}

impl ContractionOrder {
    /// Build from operand pairs, assigning result ids `T, T+1, …`.
    pub fn from_pairs(n_tensors: usize, pairs: &[(usize, usize)]) -> Result<Self, OrderError> {
        let steps = pairs
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| Step { a, b, out: n_tensors + i })
            .collect();
        Self::from_steps(n_tensors, steps)
    }

    pub fn from_steps(n_tensors: usize, steps: Vec<Step>) -> Result<Self, OrderError> {
        let expected = n_tensors.saturating_sub(1);
        if steps.len() != expected {
            return Err(OrderError::StepCount { tensors: n_tensors, expected, got: steps.len() });
        }
        let mut consumed = vec![false; n_tensors + steps.len()];
        for (i, s) in steps.iter().enumerate() {
            let out = n_tensors + i;
            if s.out != out {
                return Err(OrderError::ResultId { step: i, expected: out, got: s.out });
            }
            for id in [s.a, s.b] {
                if id >= out {
                    return Err(OrderError::UnknownOperand { step: i, id });
                }
                if std::mem::replace(&mut consumed[id], true) {
                    return Err(OrderError::Reused { step: i, id });
                }
            }
            if s.a == s.b {
                return Err(OrderError::Reused { step: i, id: s.a });
            }
        }
        Ok(ContractionOrder { n_tensors, steps })
    }

    pub fn n_tensors(&self) -> usize {
        self.n_tensors
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Id of the final result.
    pub fn root(&self) -> usize {
        self.steps.last().map_or(0, |s| s.out)
    }

    /// Total number of ids (originals plus step results).
    pub fn id_count(&self) -> usize {
        self.n_tensors + self.steps.len()
    }

    pub fn check_network(&self, tn: &TensorNetwork) -> Result<(), OrderError> {
        if tn.len() != self.n_tensors {
            return Err(OrderError::TensorCount { expected: self.n_tensors, got: tn.len() });
        }
        Ok(())
    }

    /// Order document bound to `tn`'s structure.
    pub fn to_json(&self, tn: &TensorNetwork) -> String {
        let doc = OrderDoc {
            fingerprint: tn.fingerprint(),
            n_tensors: self.n_tensors,
            steps: self.steps.iter().map(|s| [s.a, s.b, s.out]).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("order document serializes")
    }

    /// Parse an order document, rejecting it if it was made for a different network.
    pub fn from_json(text: &str, tn: &TensorNetwork) -> Result<Self, OrderError> {
        let doc: OrderDoc = serde_json::from_str(text).map_err(|e| OrderError::Json(e.to_string()))?;
        let expected = tn.fingerprint();
        if doc.fingerprint != expected {
            return Err(OrderError::Fingerprint { expected, found: doc.fingerprint });
        }
        let steps = doc.steps.iter().map(|&[a, b, out]| Step { a, b, out }).collect();
        let order = Self::from_steps(doc.n_tensors, steps)?;
        order.check_network(tn)?;
        Ok(order)
    }

    /// Hex digest identifying this order on this network.
    pub fn fingerprint(&self, tn: &TensorNetwork) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(tn.fingerprint().as_bytes());
        for s in &self.steps {
            h.update((s.a as u64).to_le_bytes());
            h.update((s.b as u64).to_le_bytes());
        }
        hex::encode(&h.finalize()[..16])
    }
}

#[derive(Serialize, Deserialize)]
struct OrderDoc {
    fingerprint: String,
    n_tensors: usize,
    steps: Vec<[usize; 3]>,
}
