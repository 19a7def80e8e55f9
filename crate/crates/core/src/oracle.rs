//! Dense statevector simulation, used as ground truth for amplitudes.

use thiserror::Error;

use crate::bitstring::Bitstring;
use crate::circuit::Circuit;
use crate::tensor::C64;

/// Largest qubit count simulated unless a different cap is given.
pub const DEFAULT_MAX_QUBITS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("statevector of {n} qubits exceeds the cap of {cap}")]
    TooManyQubits { n: usize, cap: usize },
    #[error("bitstring of length {got} given for a {expected}-qubit circuit")]
    BitstringLength { expected: usize, got: usize },
}

/// `2^n` amplitudes; the index reads qubit 0 as the most significant bit.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub n_qubits: usize,
    pub amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn amplitude(&self, b: &Bitstring) -> C64 {
        self.amplitudes[b.basis_index()]
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

pub fn statevector(c: &Circuit) -> Result<StateVector, OracleError> {
    statevector_capped(c, DEFAULT_MAX_QUBITS)
}

/// Apply every gate to |0…0⟩ in circuit order.
pub fn statevector_capped(c: &Circuit, max_qubits: usize) -> Result<StateVector, OracleError> {
    let n = c.n_qubits();
    if n > max_qubits {
        return Err(OracleError::TooManyQubits { n, cap: max_qubits });
    }
    let mut psi = vec![C64::new(0.0, 0.0); 1 << n];
    psi[0] = C64::new(1.0, 0.0);
    for g in c.gates() {
        let m = g.kind.matrix();
        match g.qubits[..] {
            [q] => apply_one(&mut psi, n, q, &m),
            [q1, q2] => apply_two(&mut psi, n, q1, q2, &m),
            _ => unreachable!("gates act on one or two qubits"),
        }
    }
    Ok(StateVector { n_qubits: n, amplitudes: psi })
}

fn apply_one(psi: &mut [C64], n: usize, q: usize, m: &[C64]) {
    let bit = 1usize << (n - 1 - q);
    for i in 0..psi.len() {
        if i & bit == 0 {
            let (a0, a1) = (psi[i], psi[i | bit]);
            psi[i] = m[0] * a0 + m[1] * a1;
            psi[i | bit] = m[2] * a0 + m[3] * a1;
        }
    }
}

fn apply_two(psi: &mut [C64], n: usize, q1: usize, q2: usize, m: &[C64]) {
    let b1 = 1usize << (n - 1 - q1);
    let b2 = 1usize << (n - 1 - q2);
    for i in 0..psi.len() {
        if i & b1 == 0 && i & b2 == 0 {
            let idx = [i, i | b2, i | b1, i | b1 | b2];
            let v = idx.map(|j| psi[j]);
            for (r, &j) in idx.iter().enumerate() {
                psi[j] = (0..4).map(|col| m[r * 4 + col] * v[col]).sum();
            }
        }
    }
}

/// Amplitude `⟨b|C|0…0⟩`.
pub fn oracle_amplitude(c: &Circuit, b: &Bitstring) -> Result<C64, OracleError> {
    if b.len() != c.n_qubits() {
        return Err(OracleError::BitstringLength { expected: c.n_qubits(), got: b.len() });
    }
    Ok(statevector(c)?.amplitude(b))
}
