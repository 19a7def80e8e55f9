//! Seeded Sycamore-style random circuits on a rectangular grid.
//!
//! Each cycle applies a random single-qubit gate from {√X, √Y, √W} to every
//! qubit (never repeating the previous choice on that qubit), followed by
//! fSim(π/2, π/6) on one of four coupler patterns. A final single-qubit
//! layer closes the circuit.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Circuit, Gate, GateKind};

const SINGLE: [GateKind; 3] = [GateKind::SqrtX, GateKind::SqrtY, GateKind::SqrtW];

/// Coupler pattern order, repeating every eight cycles.
const PATTERN_SEQUENCE: [usize; 8] = [0, 1, 2, 3, 2, 3, 0, 1];

fn grid_width(n: usize) -> usize {
    (n as f64).sqrt().ceil().max(1.0) as usize
}

/// Couplers of pattern `p` on the row-major grid holding `n` qubits.
/// Patterns 0/1 are vertical couplers starting on even/odd rows, 2/3 are
/// horizontal couplers starting on even/odd columns.
fn pattern_couplers(n: usize, p: usize) -> Vec<(usize, usize)> {
    let w = grid_width(n);
    let mut out = Vec::new();
    for q in 0..n {
        let (r, c) = (q / w, q % w);
        let other = match p {
            0 | 1 if r % 2 == p => q + w,
            2 | 3 if c % 2 == p - 2 && c + 1 < w => q + 1,
            _ => continue,
        };
        if other < n {
            out.push((q, other));
        }
    }
    out
}

/// A random circuit with `depth` full cycles on `n` qubits.
pub fn sycamore_like(n: usize, depth: usize, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last: Vec<Option<usize>> = vec![None; n];
    let mut gates = Vec::new();
    let mut single_layer = |rng: &mut ChaCha8Rng, cycle: u32, gates: &mut Vec<Gate>| {
        for (q, prev) in last.iter_mut().enumerate() {
            let pick = loop {
                let k = rng.gen_range(0..SINGLE.len());
                if Some(k) != *prev {
                    break k;
                }
            };
            *prev = Some(pick);
            gates.push(Gate::one(SINGLE[pick], q, cycle));
        }
    };
    let fsim = GateKind::FSim { theta: PI / 2.0, phi: PI / 6.0 };
    for m in 0..depth {
        single_layer(&mut rng, 2 * m as u32, &mut gates);
        let pattern = PATTERN_SEQUENCE[m % PATTERN_SEQUENCE.len()];
        for (a, b) in pattern_couplers(n, pattern) {
            gates.push(Gate::two(fsim, a, b, 2 * m as u32 + 1));
        }
    }
    single_layer(&mut rng, 2 * depth as u32, &mut gates);
    Circuit::new(n, gates).expect("generated circuits are valid by construction")
}
