//! Dense complex tensors and the pairwise contraction kernel.
//!
//! Every tensor is a row-major array over an ordered list of [`Index`]es.
//! Indices are identified by [`IndexId`]; two tensors that share an id are
//! connected along that index.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex;
use num_traits::{Float, FromPrimitive, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Double-precision complex scalar.
pub type C64 = Complex<f64>;

/// Largest tensor (in elements) the kernel will materialize unless told otherwise.
pub const DEFAULT_MAX_ELEMENTS: usize = 1 << 28;

/// Real scalar types the engine can run in.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Default + Send + Sync + fmt::Debug + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IndexId(pub u32);

impl fmt::Display for IndexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Role of an index inside a circuit network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndexTag {
    /// Wire leaving the input state of qubit `q`.
    Input(usize),
    /// Open wire carrying the measured value of qubit `q`.
    Output(usize),
    Internal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Index {
    pub id: IndexId,
    pub dim: usize,
    pub tag: IndexTag,
}

impl Index {
    pub fn new(id: u32, dim: usize) -> Self {
        Index { id: IndexId(id), dim, tag: IndexTag::Internal }
    }

    pub fn with_tag(mut self, tag: IndexTag) -> Self {
        self.tag = tag;
        self
    }

    pub fn is_output(&self) -> bool {
        matches!(self.tag, IndexTag::Output(_))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("data holds {got} elements but the index shape needs {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("index {0} appears twice on one tensor")]
    RepeatedIndex(IndexId),
    #[error("index {0} has dimension zero")]
    ZeroDim(IndexId),
    #[error("contract error: shared index {id} has dim {left} on the left operand and {right} on the right")]
    DimMismatch { id: IndexId, left: usize, right: usize },
    #[error("capacity error: result needs {elements} elements, cap is {cap}; slice the network to shrink intermediates")]
    Capacity { elements: u128, cap: usize },
    #[error("index error: {0} is not present on the tensor")]
    MissingIndex(IndexId),
    #[error("value {value} out of range for index {id} of dim {dim}")]
    ValueOutOfRange { id: IndexId, value: usize, dim: usize },
}

/// Multi-index array of complex values, row-major in index order.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor<F = f64> {
    indices: Vec<Index>,
    data: Vec<Complex<F>>,
}

impl<F: Real> DenseTensor<F> {
    pub fn new(indices: Vec<Index>, data: Vec<Complex<F>>) -> Result<Self, TensorError> {
        for (i, ix) in indices.iter().enumerate() {
            if ix.dim == 0 {
                return Err(TensorError::ZeroDim(ix.id));
            }
            if indices[..i].iter().any(|o| o.id == ix.id) {
                return Err(TensorError::RepeatedIndex(ix.id));
            }
        }
        let expected: usize = indices.iter().map(|ix| ix.dim).product();
        if expected != data.len() {
            return Err(TensorError::ShapeMismatch { expected, got: data.len() });
        }
        Ok(DenseTensor { indices, data })
    }

    pub fn scalar(value: Complex<F>) -> Self {
        DenseTensor { indices: Vec::new(), data: vec![value] }
    }

    pub fn indices(&self) -> &[Index] {
        &self.indices
    }

    pub fn data(&self) -> &[Complex<F>] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex<F>> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.indices.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.indices.iter().map(|ix| ix.dim).collect()
    }

    pub fn position(&self, id: IndexId) -> Option<usize> {
        self.indices.iter().position(|ix| ix.id == id)
    }

    pub fn has_index(&self, id: IndexId) -> bool {
        self.position(id).is_some()
    }

    /// Element at a full multi-index given in index order.
    pub fn get(&self, multi: &[usize]) -> Option<Complex<F>> {
        if multi.len() != self.indices.len() {
            return None;
        }
        let mut flat = 0;
        for (v, ix) in multi.iter().zip(&self.indices) {
            if *v >= ix.dim {
                return None;
            }
            flat = flat * ix.dim + v;
        }
        Some(self.data[flat])
    }

    /// Relabel indices in place (same positions, same dims).
    pub fn relabel(&mut self, mut f: impl FnMut(&Index) -> Index) {
        for ix in &mut self.indices {
            let new = f(ix);
            debug_assert_eq!(new.dim, ix.dim);
            *ix = new;
        }
    }

    pub fn scale(&self, alpha: Complex<F>) -> Self {
        DenseTensor {
            indices: self.indices.clone(),
            data: self.data.iter().map(|x| *x * alpha).collect(),
        }
    }

    pub fn cast<G: Real>(&self) -> DenseTensor<G> {
        let conv = |x: F| G::from_f64(x.to_f64().unwrap_or(f64::NAN)).unwrap_or_else(G::nan);
        DenseTensor {
            indices: self.indices.clone(),
            data: self.data.iter().map(|c| Complex::new(conv(c.re), conv(c.im))).collect(),
        }
    }

    /// Copy of the data laid out in the given index order.
    pub fn permuted(&self, order: &[IndexId]) -> Result<Self, TensorError> {
        let perm = order
            .iter()
            .map(|id| self.position(*id).ok_or(TensorError::MissingIndex(*id)))
            .collect::<Result<Vec<_>, _>>()?;
        if perm.len() != self.rank() {
            return Err(TensorError::ShapeMismatch { expected: self.rank(), got: perm.len() });
        }
        let indices = perm.iter().map(|&p| self.indices[p]).collect();
        Ok(DenseTensor { indices, data: permute_data(&self.data, &self.dims(), &perm) })
    }
}

/// Row-major strides for `dims`.
fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Reorder row-major data so that output axis `i` is input axis `perm[i]`.
fn permute_data<T: Copy>(data: &[T], dims: &[usize], perm: &[usize]) -> Vec<T> {
    if perm.iter().enumerate().all(|(i, &p)| i == p) {
        return data.to_vec();
    }
    let src_strides = strides(dims);
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let step: Vec<usize> = perm.iter().map(|&p| src_strides[p]).collect();
    let mut out = Vec::with_capacity(data.len());
    let mut counter = vec![0usize; out_dims.len()];
    let mut offset = 0usize;
    for _ in 0..data.len() {
        out.push(data[offset]);
        // odometer increment over output axes
        for ax in (0..out_dims.len()).rev() {
            counter[ax] += 1;
            offset += step[ax];
            if counter[ax] < out_dims[ax] {
                break;
            }
            offset -= step[ax] * out_dims[ax];
            counter[ax] = 0;
        }
    }
    out
}

/// Number of scalar multiplications needed to contract tensors with these
/// index sets: the product of dims over the union of ids.
pub fn pair_cost(a: &[Index], b: &[Index]) -> u128 {
    let mut cost: u128 = 1;
    for ix in a {
        cost = cost.saturating_mul(ix.dim as u128);
    }
    for ix in b {
        if !a.iter().any(|o| o.id == ix.id) {
            cost = cost.saturating_mul(ix.dim as u128);
        }
    }
    cost
}

/// Result of one kernel call.
#[derive(Debug, Clone)]
pub struct Contraction<F = f64> {
    pub tensor: DenseTensor<F>,
    /// Complex multiplications performed by the kernel.
    pub multiplications: u64,
}

/// Contract two tensors over every index id they share, with the default
/// element cap.
pub fn contract_pair<F: Real>(
    a: &DenseTensor<F>,
    b: &DenseTensor<F>,
) -> Result<DenseTensor<F>, TensorError> {
    contract_pair_capped(a, b, DEFAULT_MAX_ELEMENTS).map(|c| c.tensor)
}

/// Contract `a` and `b`. The result carries `a`'s unshared indices in order,
/// then `b`'s unshared indices in order.
pub fn contract_pair_capped<F: Real>(
    a: &DenseTensor<F>,
    b: &DenseTensor<F>,
    max_elements: usize,
) -> Result<Contraction<F>, TensorError> {
    let b_pos: HashMap<IndexId, usize> =
        b.indices.iter().enumerate().map(|(i, ix)| (ix.id, i)).collect();

    let mut a_free = Vec::new();
    let mut a_shared = Vec::new();
    let mut b_shared = Vec::new();
    for (i, ix) in a.indices.iter().enumerate() {
        match b_pos.get(&ix.id) {
            Some(&j) => {
                let other = b.indices[j].dim;
                if other != ix.dim {
                    return Err(TensorError::DimMismatch { id: ix.id, left: ix.dim, right: other });
                }
                a_shared.push(i);
                b_shared.push(j);
            }
            None => a_free.push(i),
        }
    }
    let b_free: Vec<usize> =
        (0..b.rank()).filter(|j| !b_shared.contains(j)).collect();

    let m: usize = a_free.iter().map(|&i| a.indices[i].dim).product();
    let k: usize = a_shared.iter().map(|&i| a.indices[i].dim).product();
    let n: usize = b_free.iter().map(|&j| b.indices[j].dim).product();
    let elements = m as u128 * n as u128;
    if elements > max_elements as u128 {
        return Err(TensorError::Capacity { elements, cap: max_elements });
    }

    let a_perm: Vec<usize> = a_free.iter().chain(&a_shared).copied().collect();
    let b_perm: Vec<usize> = b_shared.iter().chain(&b_free).copied().collect();
    let lhs = permute_data(&a.data, &a.dims(), &a_perm);
    let rhs = permute_data(&b.data, &b.dims(), &b_perm);

    let mut out = vec![Complex::<F>::zero(); m * n];
    for i in 0..m {
        let row = &mut out[i * n..(i + 1) * n];
        let lrow = &lhs[i * k..(i + 1) * k];
        for (p, &l) in lrow.iter().enumerate() {
            let rrow = &rhs[p * n..(p + 1) * n];
            for (o, &r) in row.iter_mut().zip(rrow) {
                *o = *o + l * r;
            }
        }
    }

    let indices = a_free
        .iter()
        .map(|&i| a.indices[i])
        .chain(b_free.iter().map(|&j| b.indices[j]))
        .collect();
    Ok(Contraction {
        tensor: DenseTensor { indices, data: out },
        multiplications: (m * k * n) as u64,
    })
}

/// Select the slice `id = value`, removing the index.
pub fn fix_index<F: Real>(
    t: &DenseTensor<F>,
    id: IndexId,
    value: usize,
) -> Result<DenseTensor<F>, TensorError> {
    fix_indices(t, &[(id, value)])
}

/// Select several index values at once; produces a single new tensor.
pub fn fix_indices<F: Real>(
    t: &DenseTensor<F>,
    fixes: &[(IndexId, usize)],
) -> Result<DenseTensor<F>, TensorError> {
    let mut fixed_at: Vec<Option<usize>> = vec![None; t.rank()];
    for &(id, value) in fixes {
        let pos = t.position(id).ok_or(TensorError::MissingIndex(id))?;
        let dim = t.indices[pos].dim;
        if value >= dim {
            return Err(TensorError::ValueOutOfRange { id, value, dim });
        }
        fixed_at[pos] = Some(value);
    }
    let st = strides(&t.dims());
    let base: usize = fixed_at
        .iter()
        .zip(&st)
        .filter_map(|(v, s)| v.map(|v| v * s))
        .sum();
    let keep: Vec<usize> = (0..t.rank()).filter(|&p| fixed_at[p].is_none()).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&p| t.indices[p].dim).collect();
    let keep_strides: Vec<usize> = keep.iter().map(|&p| st[p]).collect();
    let len: usize = keep_dims.iter().product();

    let mut data = Vec::with_capacity(len);
    let mut counter = vec![0usize; keep.len()];
    let mut offset = base;
    for _ in 0..len {
        data.push(t.data[offset]);
        for ax in (0..keep.len()).rev() {
            counter[ax] += 1;
            offset += keep_strides[ax];
            if counter[ax] < keep_dims[ax] {
                break;
            }
            offset -= keep_strides[ax] * keep_dims[ax];
            counter[ax] = 0;
        }
    }
    let indices = keep.iter().map(|&p| t.indices[p]).collect();
    Ok(DenseTensor { indices, data })
}
