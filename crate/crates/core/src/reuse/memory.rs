//! Symbolic replay of the executor's allocation schedule.
//!
//! The schedule, shared with the executor: original tensors are borrowed and
//! cost nothing. Each slice first copies (in ascending tensor id order) every
//! original carrying a sliced index. A contraction step allocates its result,
//! then releases both operands. Fixing an output allocates the fixed tensor,
//! then releases the unfixed one. At a node with several children every child
//! but the last works on a shared copy of the frontier; the last child takes
//! the frontier itself. A tensor is freed when its last holder releases it.

use std::collections::VecDeque;

use serde::Serialize;

use super::{PlanError, ReuseTree, Segment};
use crate::circuit::TensorNetwork;
use crate::cost::{replay, CostShape};
use crate::order::ContractionOrder;
use crate::search::SliceSpec;

/// Bytes per element of a double-precision complex tensor.
pub const BYTES_PER_ELEMENT: u128 = 16;

/// One frontier held for reuse at a branching node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CacheRecord {
    pub node: usize,
    /// Elements held by the frontier when the node is reached.
    pub elements: u128,
    /// Children that start from this frontier.
    pub reads: usize,
    /// Every tensor of the frontier was released once the subtree finished.
    pub freed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MemoryPlan {
    /// Live-element high-water mark of the depth-first traversal.
    pub peak_elements: u128,
    /// High-water mark for the first bitstring alone.
    pub single_amplitude_peak: u128,
    /// High-water mark of a level-order traversal of the same tree.
    pub breadth_first_peak: u128,
    /// Cached elements per node (zero where nothing is cached).
    pub per_node_cached: Vec<u128>,
    pub cache_records: Vec<CacheRecord>,
    /// Elements still live after the traversal (zero unless something leaks).
    pub final_live: u128,
}

impl MemoryPlan {
    pub fn peak_bytes(&self) -> u128 {
        self.peak_elements * BYTES_PER_ELEMENT
    }

    /// `peak(k) / peak(1)` for the depth-first traversal.
    pub fn ratio(&self) -> f64 {
        ratio(self.peak_elements, self.single_amplitude_peak)
    }

    /// `peak(k) / peak(1)` for the level-order traversal.
    pub fn breadth_first_ratio(&self) -> f64 {
        ratio(self.breadth_first_peak, self.single_amplitude_peak)
    }

    /// Every cache is read at least once and released when its subtree is done.
    pub fn is_lossless(&self) -> bool {
        self.final_live == 0 && self.cache_records.iter().all(|r| r.reads >= 1 && r.freed)
    }
}

fn ratio(a: u128, b: u128) -> f64 {
    if b == 0 {
        1.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Empty,
    Original,
    Owned(usize),
}

/// Static sizes of everything the schedule touches.
struct Shapes {
    /// Full element count of every original.
    original: Vec<u128>,
    /// Element count after removing sliced indices, for originals that carry one.
    sliced_copy: Vec<Option<u128>>,
    /// Element count of every step result.
    step_result: Vec<u128>,
    output_dim: Vec<u128>,
    output_owner: Vec<usize>,
}

impl Shapes {
    fn new(tn: &TensorNetwork, order: &ContractionOrder, slices: &SliceSpec) -> Self {
        let sliced = &slices.sliced_ids;
        let original = tn
            .tensors()
            .iter()
            .map(|t| t.indices().iter().map(|ix| ix.dim as u128).product())
            .collect();
        let sliced_copy = tn
            .tensors()
            .iter()
            .map(|t| {
                if t.indices().iter().any(|ix| sliced.contains(&ix.id)) {
                    Some(
                        t.indices()
                            .iter()
                            .filter(|ix| !sliced.contains(&ix.id))
                            .map(|ix| ix.dim as u128)
                            .product(),
                    )
                } else {
                    None
                }
            })
            .collect();
        let shape = CostShape::new(tn, sliced);
        let rep = replay(order, &shape);
        let n = order.n_tensors();
        let step_result = rep.legs[n..].iter().map(|l| shape.volume(l)).collect();
        let output_dim = tn.outputs().iter().map(|o| o.dim as u128).collect();
        let output_owner = (0..tn.n_qubits()).map(|q| tn.output_owner(q)).collect();
        Shapes { original, sliced_copy, step_result, output_dim, output_owner }
    }
}

/// Reference-counted element accounting.
struct Sim<'a> {
    shapes: &'a Shapes,
    order: &'a ContractionOrder,
    size: Vec<u128>,
    rc: Vec<u32>,
    live: u128,
    peak: u128,
}

impl<'a> Sim<'a> {
    fn new(shapes: &'a Shapes, order: &'a ContractionOrder) -> Self {
        Sim { shapes, order, size: Vec::new(), rc: Vec::new(), live: 0, peak: 0 }
    }

    fn alloc(&mut self, elements: u128) -> Slot {
        self.size.push(elements);
        self.rc.push(1);
        self.live += elements;
        self.peak = self.peak.max(self.live);
        Slot::Owned(self.size.len() - 1)
    }

    fn release(&mut self, slot: Slot) {
        if let Slot::Owned(h) = slot {
            self.rc[h] -= 1;
            if self.rc[h] == 0 {
                self.live -= self.size[h];
            }
        }
    }

    fn share(&mut self, frontier: &[Slot]) -> Vec<Slot> {
        for s in frontier {
            if let Slot::Owned(h) = *s {
                self.rc[h] += 1;
            }
        }
        frontier.to_vec()
    }

    fn drop_frontier(&mut self, frontier: Vec<Slot>) {
        for s in frontier {
            self.release(s);
        }
    }

    fn elements(&self, frontier: &[Slot]) -> u128 {
        frontier
            .iter()
            .map(|s| match *s {
                Slot::Owned(h) => self.size[h],
                _ => 0,
            })
            .sum()
    }

    fn current_size(&self, t: usize, slot: Slot) -> u128 {
        match slot {
            Slot::Owned(h) => self.size[h],
            _ => self.shapes.original[t],
        }
    }

    /// Fresh frontier for one slice, after the trunk.
    fn start(&mut self, trunk: std::ops::Range<usize>) -> Vec<Slot> {
        let n = self.order.n_tensors();
        let mut frontier = vec![Slot::Empty; self.order.id_count()];
        for t in 0..n {
            frontier[t] = match self.shapes.sliced_copy[t] {
                Some(e) => self.alloc(e),
                None => Slot::Original,
            };
        }
        self.run_steps(&mut frontier, trunk);
        frontier
    }

    fn run_steps(&mut self, frontier: &mut [Slot], steps: std::ops::Range<usize>) {
        let order = self.order;
        let n = order.n_tensors();
        for i in steps {
            let s = order.steps()[i];
            let a = std::mem::replace(&mut frontier[s.a], Slot::Empty);
            let b = std::mem::replace(&mut frontier[s.b], Slot::Empty);
            debug_assert!(a != Slot::Empty && b != Slot::Empty);
            frontier[n + i] = self.alloc(self.shapes.step_result[i]);
            self.release(a);
            self.release(b);
        }
    }

    fn apply(&mut self, frontier: &mut [Slot], segments: &[Segment]) {
        for seg in segments {
            let t = self.shapes.output_owner[seg.qubit];
            let old = std::mem::replace(&mut frontier[t], Slot::Empty);
            debug_assert!(old != Slot::Empty);
            let fixed = self.current_size(t, old) / self.shapes.output_dim[seg.qubit];
            frontier[t] = self.alloc(fixed);
            self.release(old);
            self.run_steps(frontier, seg.steps.clone());
        }
    }
}

struct DfsRecord {
    per_node: Vec<u128>,
    records: Vec<CacheRecord>,
}

fn dfs(sim: &mut Sim, tree: &ReuseTree, node: usize, frontier: Vec<Slot>, out: &mut DfsRecord) {
    let children = &tree.nodes()[node].children;
    if children.is_empty() {
        sim.drop_frontier(frontier);
        return;
    }
    let branching = children.len() > 1;
    let entry_rc: Vec<(usize, u32)> = if branching {
        frontier
            .iter()
            .filter_map(|s| match *s {
                Slot::Owned(h) => Some((h, sim.rc[h])),
                _ => None,
            })
            .collect()
    } else {
        Vec::new()
    };
    let cached = if branching { sim.elements(&frontier) } else { 0 };

    let last = children.len() - 1;
    let mut frontier = Some(frontier);
    for (i, edge) in children.iter().enumerate() {
        let mut f = if i == last {
            frontier.take().expect("frontier kept for the last child")
        } else {
            sim.share(frontier.as_ref().expect("frontier kept until the last child"))
        };
        sim.apply(&mut f, &edge.segments);
        dfs(sim, tree, edge.child, f, out);
    }

    if branching {
        let freed = entry_rc.iter().all(|&(h, rc)| sim.rc[h] == rc - 1);
        out.per_node[node] = cached;
        out.records.push(CacheRecord { node, elements: cached, reads: children.len(), freed });
    }
}

fn bfs(sim: &mut Sim, tree: &ReuseTree, root_frontier: Vec<Slot>) {
    let mut queue = VecDeque::new();
    queue.push_back((tree.root(), root_frontier));
    while let Some((node, frontier)) = queue.pop_front() {
        let children = &tree.nodes()[node].children;
        if children.is_empty() {
            sim.drop_frontier(frontier);
            continue;
        }
        let last = children.len() - 1;
        let mut frontier = Some(frontier);
        for (i, edge) in children.iter().enumerate() {
            let mut f = if i == last {
                frontier.take().expect("frontier kept for the last child")
            } else {
                sim.share(frontier.as_ref().expect("frontier kept until the last child"))
            };
            sim.apply(&mut f, &edge.segments);
            queue.push_back((edge.child, f));
        }
    }
}

fn depth_first_peak(shapes: &Shapes, order: &ContractionOrder, tree: &ReuseTree) -> (u128, u128, DfsRecord) {
    let mut sim = Sim::new(shapes, order);
    let mut rec = DfsRecord { per_node: vec![0; tree.nodes().len()], records: Vec::new() };
    let frontier = sim.start(tree.trunk());
    dfs(&mut sim, tree, tree.root(), frontier, &mut rec);
    (sim.peak, sim.live, rec)
}

/// Memory plan for an unsliced traversal of `tree`.
pub fn plan_memory(tree: &ReuseTree, tn: &TensorNetwork, order: &ContractionOrder) -> Result<MemoryPlan, PlanError> {
    plan_memory_sliced(tree, tn, order, &SliceSpec::none())
}

/// Memory plan for one slice; every slice has the same shapes and runs with
/// nothing carried over from the previous one.
pub fn plan_memory_sliced(
    tree: &ReuseTree,
    tn: &TensorNetwork,
    order: &ContractionOrder,
    slices: &SliceSpec,
) -> Result<MemoryPlan, PlanError> {
    tree.check_order(order, tn)?;
    let shapes = Shapes::new(tn, order, slices);

    let (peak, final_live, rec) = depth_first_peak(&shapes, order, tree);

    let first = tree.distinct()[0];
    let path = super::build_tree(tree.partition(), &[first])?;
    let (single, _, _) = depth_first_peak(&shapes, order, &path);

    let mut sim = Sim::new(&shapes, order);
    let frontier = sim.start(tree.trunk());
    bfs(&mut sim, tree, frontier);

    let mut records = rec.records;
    records.sort_by_key(|r| r.node);
    Ok(MemoryPlan {
        peak_elements: peak,
        single_amplitude_peak: single,
        breadth_first_peak: sim.peak,
        per_node_cached: rec.per_node,
        cache_records: records,
        final_live,
    })
}
