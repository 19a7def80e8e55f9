//! Mutable binary contraction trees used by the annealer.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;

use crate::circuit::TensorNetwork;
use crate::cost::CostShape;
use crate::order::ContractionOrder;

const NONE: usize = usize::MAX;

/// Leaves are `0..T`, internal nodes `T..2T-1`.
#[derive(Clone, Debug)]
pub(crate) struct ContractionTree {
    n_leaves: usize,
    parent: Vec<usize>,
    children: Vec<[usize; 2]>,
    root: usize,
}

impl ContractionTree {
    pub fn from_order(order: &ContractionOrder) -> Self {
        let n = order.n_tensors();
        let total = order.id_count();
        let mut parent = vec![NONE; total];
        let mut children = vec![[NONE; 2]; total];
        for s in order.steps() {
            children[s.out] = [s.a, s.b];
            parent[s.a] = s.out;
            parent[s.b] = s.out;
        }
        ContractionTree { n_leaves: n, parent, children, root: order.root() }
    }

    fn replace_child(&mut self, p: usize, old: usize, new: usize) {
        let slot = self.children[p].iter().position(|&c| c == old).expect("child of parent");
        self.children[p][slot] = new;
    }

    fn sibling(&self, v: usize) -> usize {
        let p = self.parent[v];
        let [a, b] = self.children[p];
        if a == v {
            b
        } else {
            a
        }
    }

    /// Swap a node's sibling with one of that node's children.
    pub fn rotate<R: Rng>(&mut self, rng: &mut R) -> bool {
        if self.n_leaves < 3 {
            return false;
        }
        let p = loop {
            let v = rng.gen_range(self.n_leaves..self.parent.len());
            if v != self.root {
                break v;
            }
        };
        let g = self.parent[p];
        let s = self.sibling(p);
        let slot = rng.gen_range(0..2);
        let c = self.children[p][slot];
        self.replace_child(g, s, c);
        self.children[p][slot] = s;
        self.parent[c] = g;
        self.parent[s] = p;
        true
    }

    /// Detach a leaf and graft it next to another node.
    pub fn reattach<R: Rng>(&mut self, rng: &mut R) -> bool {
        if self.n_leaves < 3 {
            return false;
        }
        let leaf = rng.gen_range(0..self.n_leaves);
        let q = self.parent[leaf];
        let sib = self.sibling(leaf);
        let g = self.parent[q];
        if g == NONE {
            self.root = sib;
        } else {
            self.replace_child(g, q, sib);
        }
        self.parent[sib] = g;

        let target = loop {
            let v = rng.gen_range(0..self.parent.len());
            if v != leaf && v != q {
                break v;
            }
        };
        let tp = self.parent[target];
        if tp == NONE {
            self.root = q;
        } else {
            self.replace_child(tp, target, q);
        }
        self.parent[q] = tp;
        self.children[q] = [target, leaf];
        self.parent[target] = q;
        self.parent[leaf] = q;
        true
    }

    /// Step sequence for this tree: a topological order that runs every step
    /// not opening new outputs as early as possible; among steps that do open
    /// outputs, fewer new outputs first, then cheaper, then lowest leaf.
    pub fn linearize(&self, tn: &TensorNetwork, shape: &CostShape) -> ContractionOrder {
        let n = self.n_leaves;
        let total = self.parent.len();
        let mut legs: Vec<Vec<u32>> = vec![Vec::new(); total];
        let mut min_leaf = vec![usize::MAX; total];
        let mut key: Vec<(usize, u128, usize)> = vec![(0, 0, 0); total];

        // post-order over internal nodes
        let mut post = Vec::with_capacity(total - n);
        let mut stack = vec![(self.root, false)];
        while let Some((v, expanded)) = stack.pop() {
            if v < n {
                legs[v] = shape.legs(v).to_vec();
                min_leaf[v] = v;
                continue;
            }
            if expanded {
                post.push(v);
            } else {
                stack.push((v, true));
                let [a, b] = self.children[v];
                stack.push((b, false));
                stack.push((a, false));
            }
        }
        for &v in &post {
            let [a, b] = self.children[v];
            let (cost, out) = shape.contract(&legs[a], &legs[b]);
            legs[v] = out;
            min_leaf[v] = min_leaf[a].min(min_leaf[b]);
            let opens: usize = [a, b]
                .iter()
                .filter(|&&c| c < n && tn.is_bright(c))
                .map(|&c| tn.outputs_of(c).len())
                .sum();
            key[v] = (opens, cost, min_leaf[v]);
        }

        let mut pending = vec![0u8; total];
        let mut heap = BinaryHeap::new();
        for &v in &post {
            let [a, b] = self.children[v];
            pending[v] = [a, b].iter().filter(|&&c| c >= n).count() as u8;
            if pending[v] == 0 {
                heap.push(Reverse((key[v], v)));
            }
        }
        let mut ssa = vec![NONE; total];
        for (leaf, slot) in ssa.iter_mut().enumerate().take(n) {
            *slot = leaf;
        }
        let mut pairs = Vec::with_capacity(post.len());
        while let Some(Reverse((_, v))) = heap.pop() {
            let [a, b] = self.children[v];
            pairs.push((ssa[a], ssa[b]));
            ssa[v] = n + pairs.len() - 1;
            let p = self.parent[v];
            if p != NONE {
                pending[p] -= 1;
                if pending[p] == 0 {
                    heap.push(Reverse((key[p], p)));
                }
            }
        }
        ContractionOrder::from_pairs(n, &pairs).expect("linearized tree is a valid order")
    }
}
