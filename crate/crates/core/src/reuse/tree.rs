use std::ops::Range;

use serde::Serialize;

use super::PlanError;
use crate::bitstring::{dedup, Bitstring};
use crate::circuit::TensorNetwork;
use crate::cost::{partition_blocks, BlockPartition};
use crate::order::ContractionOrder;

/// Fix one output, then run a range of contraction steps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Segment {
    /// Layer opened by this segment (1-based).
    pub layer: usize,
    pub qubit: usize,
    pub value: u8,
    pub steps: Range<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub child: usize,
    pub segments: Vec<Segment>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeNode {
    /// Number of outputs fixed on the path from the root.
    pub depth: usize,
    pub parent: Option<usize>,
    /// Ordered by the value of the first fixed output (0 before 1).
    pub children: Vec<Edge>,
    /// Index into the distinct bitstrings for leaves.
    pub leaf: Option<usize>,
}

/// Prefix trie of the requested bitstrings in layer order. The trunk block
/// runs once before the root; every edge fixes outputs and runs the blocks
/// that follow them.
#[derive(Clone, Debug, PartialEq)]
pub struct ReuseTree {
    nodes: Vec<TreeNode>,
    partition: BlockPartition,
    distinct: Vec<Bitstring>,
    /// Distinct-list position of every requested bitstring.
    requested: Vec<usize>,
    multiplicity: Vec<usize>,
}

impl ReuseTree {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn trunk(&self) -> Range<usize> {
        self.partition.blocks[0].clone()
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn n_layers(&self) -> usize {
        self.partition.layer_order.len()
    }

    pub fn distinct(&self) -> &[Bitstring] {
        &self.distinct
    }

    pub fn requested(&self) -> &[usize] {
        &self.requested
    }

    pub fn multiplicity(&self) -> &[usize] {
        &self.multiplicity
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.leaf.is_some()).count()
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|n| n.children.len()).sum()
    }

    /// Edges entering each layer; `w[0] = 1` for the trunk.
    pub fn widths(&self) -> Vec<u64> {
        let mut w = vec![0u64; self.n_layers() + 1];
        w[0] = 1;
        for node in &self.nodes {
            for e in &node.children {
                for s in &e.segments {
                    w[s.layer] += 1;
                }
            }
        }
        w
    }

    /// Nodes per depth.
    pub fn nodes_per_depth(&self) -> Vec<usize> {
        let mut out = vec![0; self.n_layers() + 1];
        for n in &self.nodes {
            out[n.depth] += 1;
        }
        out
    }

    /// True when every node has at most one child.
    pub fn is_path(&self) -> bool {
        self.nodes.iter().all(|n| n.children.len() <= 1)
    }

    /// Check this tree was built from `order`'s partition of `tn`.
    pub fn check_order(&self, order: &ContractionOrder, tn: &TensorNetwork) -> Result<(), PlanError> {
        let p = partition_blocks(order, tn)?;
        if p != self.partition {
            return Err(PlanError::Mismatch);
        }
        Ok(())
    }
}

/// Build the reuse trie for `bitstrings` under `partition`'s layer order.
/// Duplicates share a leaf and are counted in the leaf's multiplicity.
pub fn build_tree(partition: &BlockPartition, bitstrings: &[Bitstring]) -> Result<ReuseTree, PlanError> {
    let n = partition.layer_order.len();
    if bitstrings.is_empty() {
        return Err(PlanError::NoBitstrings);
    }
    if let Some(b) = bitstrings.iter().find(|b| b.len() != n) {
        return Err(PlanError::BitstringLength { expected: n, got: b.len() });
    }
    let (distinct, requested) = dedup(bitstrings);
    let mut multiplicity = vec![0; distinct.len()];
    for &r in &requested {
        multiplicity[r] += 1;
    }

    let mut nodes = vec![TreeNode { depth: 0, parent: None, children: Vec::new(), leaf: None }];
    for (d, b) in distinct.iter().enumerate() {
        let mut at = 0;
        for layer in 1..=n {
            let qubit = partition.layer_order[layer - 1];
            let value = b.get(qubit);
            let existing = nodes[at].children.iter().find(|e| e.segments[0].value == value).map(|e| e.child);
            at = match existing {
                Some(c) => c,
                None => {
                    let child = nodes.len();
                    nodes.push(TreeNode { depth: layer, parent: Some(at), children: Vec::new(), leaf: None });
                    nodes[at].children.push(Edge {
                        child,
                        segments: vec![Segment { layer, qubit, value, steps: partition.blocks[layer].clone() }],
                    });
                    child
                }
            };
        }
        nodes[at].leaf = Some(d);
    }
    for node in &mut nodes {
        node.children.sort_by_key(|e| e.segments[0].value);
    }
    Ok(ReuseTree { nodes, partition: partition.clone(), distinct, requested, multiplicity })
}

/// Merge every chain of single-child nodes below the root into one edge.
pub fn coalesce(tree: &ReuseTree) -> ReuseTree {
    let mut nodes = vec![TreeNode { depth: 0, parent: None, children: Vec::new(), leaf: tree.nodes[0].leaf }];
    // (old node, new node)
    let mut stack = vec![(0usize, 0usize)];
    while let Some((old, new)) = stack.pop() {
        let mut edges = Vec::with_capacity(tree.nodes[old].children.len());
        for e in &tree.nodes[old].children {
            let mut segments = e.segments.clone();
            let mut c = e.child;
            while tree.nodes[c].children.len() == 1 && tree.nodes[c].leaf.is_none() {
                let only = &tree.nodes[c].children[0];
                segments.extend(only.segments.iter().cloned());
                c = only.child;
            }
            let id = nodes.len();
            nodes.push(TreeNode {
                depth: tree.nodes[c].depth,
                parent: Some(new),
                children: Vec::new(),
                leaf: tree.nodes[c].leaf,
            });
            edges.push(Edge { child: id, segments });
            stack.push((c, id));
        }
        nodes[new].children = edges;
    }
    ReuseTree { nodes, ..tree.clone() }
}
