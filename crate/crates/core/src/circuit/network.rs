use sha2::{Digest, Sha256};

use super::{gate_matrix, Circuit};
use crate::tensor::{DenseTensor, Index, IndexId, IndexTag, C64};

/// A closed circuit network with one open output index per qubit.
///
/// Tensor ids are positions in [`TensorNetwork::tensors`]: the `n` input
/// states come first, then one tensor per gate in circuit order.
#[derive(Clone, Debug)]
pub struct TensorNetwork {
    n_qubits: usize,
    tensors: Vec<DenseTensor>,
    outputs: Vec<Index>,
    output_owner: Vec<usize>,
    bright: Vec<bool>,
    index_dims: Vec<usize>,
}

impl TensorNetwork {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn tensors(&self) -> &[DenseTensor] {
        &self.tensors
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    /// Open output index of each qubit.
    pub fn outputs(&self) -> &[Index] {
        &self.outputs
    }

    /// Tensor carrying qubit `q`'s output index.
    pub fn output_owner(&self, q: usize) -> usize {
        self.output_owner[q]
    }

    pub fn bright_flags(&self) -> &[bool] {
        &self.bright
    }

    pub fn is_bright(&self, t: usize) -> bool {
        self.bright[t]
    }

    /// Output qubits carried by tensor `t`, ascending.
    pub fn outputs_of(&self, t: usize) -> Vec<usize> {
        let mut qs: Vec<usize> = self.tensors[t]
            .indices()
            .iter()
            .filter_map(|ix| match ix.tag {
                IndexTag::Output(q) => Some(q),
                _ => None,
            })
            .collect();
        qs.sort_unstable();
        qs
    }

    /// Dimension of every index, by id.
    pub fn index_dims(&self) -> &[usize] {
        &self.index_dims
    }

    pub fn index_count(&self) -> usize {
        self.index_dims.len()
    }

    /// Hex SHA-256 over the tensor/index structure (not the values).
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.n_qubits as u64).to_le_bytes());
        h.update((self.tensors.len() as u64).to_le_bytes());
        for t in &self.tensors {
            h.update((t.rank() as u64).to_le_bytes());
            for ix in t.indices() {
                h.update(ix.id.0.to_le_bytes());
                h.update((ix.dim as u64).to_le_bytes());
                let tag: [u64; 2] = match ix.tag {
                    IndexTag::Input(q) => [1, q as u64],
                    IndexTag::Output(q) => [2, q as u64],
                    IndexTag::Internal => [0, 0],
                };
                h.update(tag[0].to_le_bytes());
                h.update(tag[1].to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

/// Wire a circuit into a network starting from |0…0⟩.
///
/// Each gate tensor carries its output wires first, then its input wires.
/// The last tensor on a qubit's line owns that qubit's output index.
pub fn build_tensor_network(c: &Circuit) -> TensorNetwork {
    let n = c.n_qubits();
    let mut next_id = 0u32;
    let mut fresh = |tag: IndexTag| {
        let ix = Index { id: IndexId(next_id), dim: 2, tag };
        next_id += 1;
        ix
    };

    let mut tensors = Vec::with_capacity(n + c.gates().len());
    let mut wire: Vec<Index> = Vec::with_capacity(n);
    let mut owner: Vec<usize> = Vec::with_capacity(n);
    for q in 0..n {
        let ix = fresh(IndexTag::Input(q));
        tensors.push(
            DenseTensor::new(vec![ix], vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
                .expect("input state shape"),
        );
        wire.push(ix);
        owner.push(q);
    }

    for g in c.gates() {
        let arity = g.qubits.len();
        let outs: Vec<Index> = g.qubits.iter().map(|_| fresh(IndexTag::Internal)).collect();
        let mut t = gate_matrix(g);
        t.relabel(|placeholder| {
            let slot = placeholder.id.0 as usize;
            if slot < arity {
                outs[slot]
            } else {
                wire[g.qubits[slot - arity]]
            }
        });
        let tid = tensors.len();
        tensors.push(t);
        for (&q, &o) in g.qubits.iter().zip(&outs) {
            wire[q] = o;
            owner[q] = tid;
        }
    }

    // final wires become the open outputs
    let mut outputs = Vec::with_capacity(n);
    for q in 0..n {
        let out = Index { tag: IndexTag::Output(q), ..wire[q] };
        tensors[owner[q]].relabel(|ix| if ix.id == out.id { out } else { *ix });
        outputs.push(out);
    }

    let mut index_dims = vec![0; next_id as usize];
    for t in &tensors {
        for ix in t.indices() {
            index_dims[ix.id.0 as usize] = ix.dim;
        }
    }
    let bright = tensors.iter().map(|t| t.indices().iter().any(Index::is_output)).collect();

    TensorNetwork { n_qubits: n, tensors, outputs, output_owner: owner, bright, index_dims }
}
