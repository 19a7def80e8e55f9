//! Amplitude execution: single-amplitude replay, depth-first reuse-tree
//! traversal, and slice- or subtree-parallel runs.
//!
//! Every tensor the engine creates is registered with a [`Meter`] for its
//! whole lifetime, so the live-element high-water mark is measured rather
//! than inferred.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bitstring::Bitstring;
use crate::circuit::TensorNetwork;
use crate::order::{ContractionOrder, OrderError};
use crate::reuse::{PlanError, ReuseTree, Segment};
use crate::search::SliceSpec;
use crate::tensor::{contract_pair_capped, fix_index, fix_indices, DenseTensor, IndexId, Real, TensorError, C64, DEFAULT_MAX_ELEMENTS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExecError {
    #[error("step {step}: {source}")]
    Step { step: usize, source: TensorError },
    #[error("fixing outputs: {0}")]
    Fix(TensorError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error("bitstring of length {got} given for a {expected}-qubit network")]
    BitstringLength { expected: usize, got: usize },
    #[error("slice {slice} failed: {source}")]
    Slice { slice: u64, source: Box<ExecError> },
    #[error("worker count must be at least 1")]
    Workers,
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExecOptions {
    /// Largest tensor the kernel may produce, in elements.
    pub max_elements: usize,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions { max_elements: DEFAULT_MAX_ELEMENTS }
    }
}

/// Counters recorded by one run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Instrumentation {
    /// Complex multiplications performed by the kernel.
    pub multiplications: u128,
    /// High-water mark of live engine-owned elements.
    pub peak_live_elements: u128,
    /// Largest rank of any step result.
    pub max_intermediate_rank: usize,
}

impl Instrumentation {
    fn merge(&mut self, other: &Instrumentation) {
        self.multiplications += other.multiplications;
        self.peak_live_elements = self.peak_live_elements.max(other.peak_live_elements);
        self.max_intermediate_rank = self.max_intermediate_rank.max(other.max_intermediate_rank);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeEntry {
    pub bitstring: Bitstring,
    pub amplitude: C64,
    /// `|amplitude|²`.
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMeta {
    pub order_fingerprint: String,
    pub n_slices: u64,
    pub multiplications: u128,
    pub peak_live_elements: u128,
    pub max_intermediate_rank: usize,
}

/// Amplitudes of every requested bitstring, in request order.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeSet {
    pub entries: Vec<AmplitudeEntry>,
    pub n_qubits: usize,
    pub meta: RunMeta,
}

impl AmplitudeSet {
    pub fn probabilities(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.probability).collect()
    }
}

/// Live and peak element counts for one task.
#[derive(Debug, Default)]
pub struct Meter {
    live: AtomicU64,
    peak: AtomicU64,
}

impl Meter {
    fn add(&self, n: u64) {
        let now = self.live.fetch_add(n, Ordering::Relaxed) + n;
        self.peak.fetch_max(now, Ordering::Relaxed);
    }

    fn sub(&self, n: u64) {
        self.live.fetch_sub(n, Ordering::Relaxed);
    }

    pub fn live(&self) -> u64 {
        self.live.load(Ordering::Relaxed)
    }

    pub fn peak(&self) -> u64 {
        self.peak.load(Ordering::Relaxed)
    }
}

/// An engine-owned tensor, counted from creation to drop.
struct Tracked<F: Real> {
    tensor: DenseTensor<F>,
    meter: Arc<Meter>,
}

impl<F: Real> Tracked<F> {
    fn new(tensor: DenseTensor<F>, meter: &Arc<Meter>) -> Arc<Self> {
        meter.add(tensor.len() as u64);
        Arc::new(Tracked { tensor, meter: Arc::clone(meter) })
    }
}

impl<F: Real> Drop for Tracked<F> {
    fn drop(&mut self) {
        self.meter.sub(self.tensor.len() as u64);
    }
}

enum Slot<'a, F: Real> {
    Empty,
    Original(&'a DenseTensor<F>),
    Owned(Arc<Tracked<F>>),
}

impl<'a, F: Real> Clone for Slot<'a, F> {
    fn clone(&self) -> Self {
        match self {
            Slot::Empty => Slot::Empty,
            Slot::Original(t) => Slot::Original(t),
            Slot::Owned(t) => Slot::Owned(Arc::clone(t)),
        }
    }
}

impl<'a, F: Real> Slot<'a, F> {
    fn tensor(&self) -> &DenseTensor<F> {
        match self {
            Slot::Original(t) => t,
            Slot::Owned(t) => &t.tensor,
            Slot::Empty => panic!("operand already consumed"),
        }
    }
}

type Frontier<'a, F> = Vec<Slot<'a, F>>;

/// Shared state of one traversal task.
struct Engine<'a, F: Real> {
    tn: &'a TensorNetwork,
    originals: &'a [DenseTensor<F>],
    order: &'a ContractionOrder,
    opts: ExecOptions,
    meter: Arc<Meter>,
    stats: Instrumentation,
}

impl<'a, F: Real> Engine<'a, F> {
    fn new(tn: &'a TensorNetwork, originals: &'a [DenseTensor<F>], order: &'a ContractionOrder, opts: ExecOptions) -> Self {
        Engine { tn, originals, order, opts, meter: Arc::new(Meter::default()), stats: Instrumentation::default() }
    }

    fn finish(mut self) -> Instrumentation {
        self.stats.peak_live_elements = self.meter.peak() as u128;
        self.stats
    }

    /// Frontier of originals with the slice's index values applied.
    fn start(&self, fixes: &[(IndexId, usize)]) -> Result<Frontier<'a, F>, ExecError> {
        let mut frontier: Frontier<'a, F> = vec![Slot::Empty; self.order.id_count()];
        for (t, orig) in self.originals.iter().enumerate() {
            let mine: Vec<(IndexId, usize)> = fixes.iter().copied().filter(|&(id, _)| orig.has_index(id)).collect();
            frontier[t] = if mine.is_empty() {
                Slot::Original(orig)
            } else {
                let fixed = fix_indices(orig, &mine).map_err(ExecError::Fix)?;
                Slot::Owned(Tracked::new(fixed, &self.meter))
            };
        }
        Ok(frontier)
    }

    fn run_steps(&mut self, frontier: &mut Frontier<'a, F>, steps: std::ops::Range<usize>) -> Result<(), ExecError> {
        let n = self.order.n_tensors();
        for i in steps {
            let s = self.order.steps()[i];
            let a = std::mem::replace(&mut frontier[s.a], Slot::Empty);
            let b = std::mem::replace(&mut frontier[s.b], Slot::Empty);
            let c = contract_pair_capped(a.tensor(), b.tensor(), self.opts.max_elements)
                .map_err(|source| ExecError::Step { step: i, source })?;
            self.stats.multiplications += c.multiplications as u128;
            self.stats.max_intermediate_rank = self.stats.max_intermediate_rank.max(c.tensor.rank());
            frontier[n + i] = Slot::Owned(Tracked::new(c.tensor, &self.meter));
            drop(a);
            drop(b);
        }
        Ok(())
    }

    fn apply(&mut self, frontier: &mut Frontier<'a, F>, segments: &[Segment]) -> Result<(), ExecError> {
        for seg in segments {
            let t = self.tn.output_owner(seg.qubit);
            let id = self.tn.outputs()[seg.qubit].id;
            let old = std::mem::replace(&mut frontier[t], Slot::Empty);
            let fixed = fix_index(old.tensor(), id, seg.value as usize).map_err(ExecError::Fix)?;
            frontier[t] = Slot::Owned(Tracked::new(fixed, &self.meter));
            drop(old);
            self.run_steps(frontier, seg.steps.clone())?;
        }
        Ok(())
    }

    fn scalar(&self, frontier: &Frontier<'a, F>) -> Complex<F> {
        let t = frontier[self.order.root()].tensor();
        debug_assert_eq!(t.rank(), 0);
        t.data()[0]
    }

    /// Depth-first traversal below `node`; writes leaf amplitudes into `amps`.
    fn dfs(
        &mut self,
        tree: &ReuseTree,
        node: usize,
        frontier: Frontier<'a, F>,
        amps: &mut [Complex<F>],
    ) -> Result<(), ExecError> {
        let n = &tree.nodes()[node];
        if n.children.is_empty() {
            if let Some(d) = n.leaf {
                amps[d] = self.scalar(&frontier);
            }
            drop(frontier);
            return Ok(());
        }
        let last = n.children.len() - 1;
        let mut frontier = Some(frontier);
        for (i, edge) in n.children.iter().enumerate() {
            let mut f = if i == last {
                frontier.take().expect("frontier kept for the last child")
            } else {
                frontier.as_ref().expect("frontier kept until the last child").clone()
            };
            self.apply(&mut f, &edge.segments)?;
            self.dfs(tree, edge.child, f, amps)?;
        }
        Ok(())
    }

    /// Same frontier, re-owned by this engine's meter.
    fn adopt(&self, frontier: &Frontier<'a, F>) -> Frontier<'a, F> {
        frontier
            .iter()
            .map(|s| match s {
                Slot::Owned(t) => Slot::Owned(Tracked::new(t.tensor.clone(), &self.meter)),
                other => other.clone(),
            })
            .collect()
    }
}

fn check_bitstring(tn: &TensorNetwork, b: &Bitstring) -> Result<(), ExecError> {
    if b.len() != tn.n_qubits() {
        return Err(ExecError::BitstringLength { expected: tn.n_qubits(), got: b.len() });
    }
    Ok(())
}

fn cast_originals<F: Real>(tn: &TensorNetwork) -> Vec<DenseTensor<F>> {
    tn.tensors().iter().map(|t| t.cast::<F>()).collect()
}

fn to_c64<F: Real>(z: Complex<F>) -> C64 {
    C64::new(z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN))
}

/// One amplitude by fixing every output up front and replaying the order,
/// summed over slices in ascending slice order.
pub fn run_single<F: Real>(
    tn: &TensorNetwork,
    order: &ContractionOrder,
    bitstring: &Bitstring,
    slices: &SliceSpec,
    opts: &ExecOptions,
) -> Result<(C64, Instrumentation), ExecError> {
    order.check_network(tn)?;
    check_bitstring(tn, bitstring)?;
    let originals = cast_originals::<F>(tn);
    let outputs: Vec<(IndexId, usize)> =
        tn.outputs().iter().enumerate().map(|(q, o)| (o.id, bitstring.get(q) as usize)).collect();
    let mut engine = Engine::new(tn, &originals, order, *opts);
    let mut acc = Complex::<F>::zero();
    for s in 0..slices.n_slices {
        let mut fixes = slices.assignment(s, tn);
        fixes.extend_from_slice(&outputs);
        let run = engine.start(&fixes).and_then(|mut f| {
            engine.run_steps(&mut f, 0..order.len())?;
            Ok(engine.scalar(&f))
        });
        let v = run.map_err(|e| slice_error(slices, s, e))?;
        acc = acc + v;
    }
    Ok((to_c64(acc), engine.finish()))
}

fn slice_error(slices: &SliceSpec, s: u64, e: ExecError) -> ExecError {
    if slices.is_empty() {
        e
    } else {
        ExecError::Slice { slice: s, source: Box::new(e) }
    }
}

/// Amplitudes of one slice by depth-first traversal.
fn run_slice<F: Real>(
    engine: &mut Engine<'_, F>,
    tree: &ReuseTree,
    slices: &SliceSpec,
    s: u64,
) -> Result<Vec<Complex<F>>, ExecError> {
    let mut amps = vec![Complex::<F>::zero(); tree.distinct().len()];
    let mut frontier = engine.start(&slices.assignment(s, engine.tn))?;
    engine.run_steps(&mut frontier, tree.trunk())?;
    engine.dfs(tree, tree.root(), frontier, &mut amps)?;
    Ok(amps)
}

fn assemble<F: Real>(
    tn: &TensorNetwork,
    order: &ContractionOrder,
    tree: &ReuseTree,
    slices: &SliceSpec,
    amps: &[Complex<F>],
    stats: Instrumentation,
) -> AmplitudeSet {
    let entries = tree
        .requested()
        .iter()
        .map(|&d| {
            let amplitude = to_c64(amps[d]);
            AmplitudeEntry { bitstring: tree.distinct()[d], amplitude, probability: amplitude.norm_sqr() }
        })
        .collect();
    AmplitudeSet {
        entries,
        n_qubits: tn.n_qubits(),
        meta: RunMeta {
            order_fingerprint: order.fingerprint(tn),
            n_slices: slices.n_slices,
            multiplications: stats.multiplications,
            peak_live_elements: stats.peak_live_elements,
            max_intermediate_rank: stats.max_intermediate_rank,
        },
    }
}

fn accumulate<F: Real>(acc: &mut [Complex<F>], part: &[Complex<F>]) {
    for (a, &p) in acc.iter_mut().zip(part) {
        *a = *a + p;
    }
}

/// All requested amplitudes by depth-first reuse-tree traversal, one slice
/// after another; slice results are summed in ascending slice order.
pub fn run_multi<F: Real>(
    tn: &TensorNetwork,
    order: &ContractionOrder,
    tree: &ReuseTree,
    slices: &SliceSpec,
    opts: &ExecOptions,
) -> Result<AmplitudeSet, ExecError> {
    tree.check_order(order, tn)?;
    let originals = cast_originals::<F>(tn);
    let mut engine = Engine::new(tn, &originals, order, *opts);
    let mut acc = vec![Complex::<F>::zero(); tree.distinct().len()];
    for s in 0..slices.n_slices {
        let part = run_slice(&mut engine, tree, slices, s).map_err(|e| slice_error(slices, s, e))?;
        accumulate(&mut acc, &part);
    }
    let stats = engine.finish();
    Ok(assemble(tn, order, tree, slices, &acc, stats))
}

/// [`run_multi`] on a pool of `workers` threads.
///
/// With slices, each slice is an independent task. Without slices the tree is
/// walked down to its first branching node and every child subtree becomes a
/// task working on its own copy of the frontier. The task split does not
/// depend on `workers`, and results are reduced in a fixed order, so the
/// output is identical for every worker count.
pub fn run_parallel<F: Real>(
    tn: &TensorNetwork,
    order: &ContractionOrder,
    tree: &ReuseTree,
    slices: &SliceSpec,
    workers: usize,
    opts: &ExecOptions,
) -> Result<AmplitudeSet, ExecError> {
    if workers == 0 {
        return Err(ExecError::Workers);
    }
    tree.check_order(order, tn)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ExecError::Pool(e.to_string()))?;
    let originals = cast_originals::<F>(tn);
    let k = tree.distinct().len();

    let (acc, stats) = if !slices.is_empty() {
        let parts: Vec<Result<(Vec<Complex<F>>, Instrumentation), ExecError>> = pool.install(|| {
            (0..slices.n_slices)
                .into_par_iter()
                .map(|s| {
                    let mut engine = Engine::new(tn, &originals, order, *opts);
                    let amps = run_slice(&mut engine, tree, slices, s).map_err(|e| slice_error(slices, s, e))?;
                    Ok((amps, engine.finish()))
                })
                .collect()
        });
        let mut acc = vec![Complex::<F>::zero(); k];
        let mut stats = Instrumentation::default();
        for part in parts {
            let (amps, st) = part?;
            accumulate(&mut acc, &amps);
            stats.merge(&st);
        }
        (acc, stats)
    } else {
        subtree_parallel(tn, &originals, order, tree, opts, &pool)?
    };
    Ok(assemble(tn, order, tree, slices, &acc, stats))
}

fn subtree_parallel<F: Real>(
    tn: &TensorNetwork,
    originals: &[DenseTensor<F>],
    order: &ContractionOrder,
    tree: &ReuseTree,
    opts: &ExecOptions,
    pool: &rayon::ThreadPool,
) -> Result<(Vec<Complex<F>>, Instrumentation), ExecError> {
    let k = tree.distinct().len();
    let mut acc = vec![Complex::<F>::zero(); k];
    let mut main = Engine::new(tn, originals, order, *opts);
    let mut frontier = main.start(&[])?;
    main.run_steps(&mut frontier, tree.trunk())?;
    let mut node = tree.root();
    while tree.nodes()[node].children.len() == 1 {
        let edge = &tree.nodes()[node].children[0];
        main.apply(&mut frontier, &edge.segments)?;
        node = edge.child;
    }
    let children = &tree.nodes()[node].children;
    if children.is_empty() {
        main.dfs(tree, node, frontier, &mut acc)?;
        return Ok((acc, main.finish()));
    }

    let frontier = &frontier;
    let parts: Vec<Result<(Vec<Complex<F>>, Instrumentation), ExecError>> = pool.install(|| {
        children
            .par_iter()
            .map(|edge| {
                let mut engine = Engine::new(tn, originals, order, *opts);
                let mut amps = vec![Complex::<F>::zero(); k];
                let mut f = engine.adopt(frontier);
                engine.apply(&mut f, &edge.segments)?;
                engine.dfs(tree, edge.child, f, &mut amps)?;
                Ok((amps, engine.finish()))
            })
            .collect()
    });
    let mut stats = Instrumentation::default();
    for part in parts {
        let (amps, st) = part?;
        // each leaf belongs to exactly one subtree
        accumulate(&mut acc, &amps);
        stats.merge(&st);
    }
    stats.merge(&main.finish());
    Ok((acc, stats))
}
