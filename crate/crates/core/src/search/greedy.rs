use std::collections::{BTreeMap, HashMap};

use crate::circuit::TensorNetwork;
use crate::cost::CostShape;
use crate::order::ContractionOrder;

/// Tie-break rank of a live tensor id. Seed 0 keeps plain id order.
fn tie_rank(seed: u64, id: usize) -> u64 {
    if seed == 0 {
        return id as u64;
    }
    // splitmix64 finalizer
    let mut z = (id as u64).wrapping_add(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

type Key = (u128, usize, u64, u64);

fn offer(best: &mut Option<(Key, usize, usize)>, seed: u64, a: usize, b: usize, cost: u128, rank: usize) {
    let (ra, rb) = (tie_rank(seed, a), tie_rank(seed, b));
    let key = (cost, rank, ra.min(rb), ra.max(rb));
    if best.as_ref().is_none_or(|(k, _, _)| key < *k) {
        *best = Some((key, a, b));
    }
}

/// Repeatedly contract the connected pair with the smallest pair cost.
///
/// Ties go to the smaller result rank, then to the lower tensor ids (the seed
/// permutes the id ranking used for this last tie-break). When no remaining
/// pair shares an index, the two smallest tensors are joined by an outer
/// product.
pub fn greedy_order(tn: &TensorNetwork, seed: u64) -> ContractionOrder {
    let shape = CostShape::new(tn, &[]);
    let n = tn.len();
    let mut live: BTreeMap<usize, Vec<u32>> = (0..n).map(|t| (t, shape.legs(t).to_vec())).collect();
    let mut holders: HashMap<u32, Vec<usize>> = HashMap::new();
    for (&t, legs) in &live {
        for &i in legs {
            holders.entry(i).or_default().push(t);
        }
    }

    let mut pairs = Vec::with_capacity(n.saturating_sub(1));
    let mut next_id = n;
    while live.len() > 1 {
        let mut best: Option<(Key, usize, usize)> = None;
        for (&a, legs) in &live {
            for i in legs {
                for &b in &holders[i] {
                    if b > a {
                        let (cost, out) = shape.contract(legs, &live[&b]);
                        offer(&mut best, seed, a, b, cost, out.len());
                    }
                }
            }
        }
        if best.is_none() {
            let mut by_size: Vec<(u128, u64, usize)> =
                live.iter().map(|(&t, l)| (shape.volume(l), tie_rank(seed, t), t)).collect();
            by_size.sort_unstable();
            let (a, b) = (by_size[0].2, by_size[1].2);
            let (cost, out) = shape.contract(&live[&a], &live[&b]);
            offer(&mut best, seed, a, b, cost, out.len());
        }
        let (_, a, b) = best.expect("a pair exists while two tensors are live");
        let la = live.remove(&a).expect("live");
        let lb = live.remove(&b).expect("live");
        let (_, out) = shape.contract(&la, &lb);
        for i in la.iter().chain(&lb) {
            if let Some(h) = holders.get_mut(i) {
                h.retain(|&t| t != a && t != b);
            }
        }
        for &i in &out {
            holders.entry(i).or_default().push(next_id);
        }
        live.insert(next_id, out);
        pairs.push((a, b));
        next_id += 1;
    }
    ContractionOrder::from_pairs(n, &pairs).expect("greedy produces a valid order")
}
