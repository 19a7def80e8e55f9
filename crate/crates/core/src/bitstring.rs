//! Measured output strings. Character `q` of the text form is qubit `q`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::MAX_QUBITS;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BitstringError {
    #[error("line {line}: bitstring has length {got}, expected {expected}")]
    Length { line: usize, expected: usize, got: usize },
    #[error("line {line}: invalid character `{ch}` (only 0 and 1 allowed)")]
    Char { line: usize, ch: char },
    #[error("bitstrings longer than {MAX_QUBITS} are not supported")]
    TooLong,
    #[error("no bitstrings given")]
    Empty,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitstring {
    /// Bit `q` holds qubit `q`.
    bits: u128,
    len: u8,
}

impl Bitstring {
    pub fn zeros(len: usize) -> Self {
        assert!(len <= MAX_QUBITS);
        Bitstring { bits: 0, len: len as u8 }
    }

    pub fn from_bits(values: &[u8]) -> Self {
        let mut b = Bitstring::zeros(values.len());
        for (q, &v) in values.iter().enumerate() {
            b.set(q, v);
        }
        b
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, q: usize) -> u8 {
        debug_assert!(q < self.len());
        ((self.bits >> q) & 1) as u8
    }

    pub fn set(&mut self, q: usize, v: u8) {
        debug_assert!(q < self.len());
        if v & 1 == 1 {
            self.bits |= 1 << q;
        } else {
            self.bits &= !(1 << q);
        }
    }

    /// Basis-state index with qubit 0 as the most significant bit.
    pub fn basis_index(&self) -> usize {
        (0..self.len()).fold(0usize, |acc, q| (acc << 1) | self.get(q) as usize)
    }

    pub fn from_basis_index(index: usize, len: usize) -> Self {
        let mut b = Bitstring::zeros(len);
        for q in 0..len {
            b.set(q, ((index >> (len - 1 - q)) & 1) as u8);
        }
        b
    }

    /// Bits read in `order` packed from the most significant end, so that
    /// numeric order equals lexicographic order of the permuted string.
    pub fn packed_in_order(&self, order: &[usize]) -> u128 {
        order
            .iter()
            .enumerate()
            .fold(0u128, |acc, (i, &q)| acc | ((self.get(q) as u128) << (127 - i)))
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.len() {
            f.write_str(if self.get(q) == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bitstring({self})")
    }
}

impl FromStr for Bitstring {
    type Err = BitstringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_line(s.trim(), 1, None)
    }
}

fn parse_line(s: &str, line: usize, expected: Option<usize>) -> Result<Bitstring, BitstringError> {
    let len = s.chars().count();
    if let Some(expected) = expected {
        if len != expected {
            return Err(BitstringError::Length { line, expected, got: len });
        }
    }
    if len > MAX_QUBITS {
        return Err(BitstringError::TooLong);
    }
    let mut b = Bitstring::zeros(len);
    for (q, ch) in s.chars().enumerate() {
        match ch {
            '0' => {}
            '1' => b.set(q, 1),
            _ => return Err(BitstringError::Char { line, ch }),
        }
    }
    Ok(b)
}

/// Parse a bitstring file: one string of length `n` per non-empty line.
pub fn parse_bitstrings(text: &str, n: usize) -> Result<Vec<Bitstring>, BitstringError> {
    let out = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .map(|(line, l)| parse_line(l, line, Some(n)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(out)
}

pub fn format_bitstrings(list: &[Bitstring]) -> String {
    list.iter().map(|b| format!("{b}\n")).collect()
}

/// `k` uniformly random strings of length `n` (duplicates possible).
pub fn random_bitstrings(n: usize, k: usize, seed: u64) -> Vec<Bitstring> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k)
        .map(|_| {
            let mut b = Bitstring::zeros(n);
            for q in 0..n {
                b.set(q, rng.gen_range(0..2u8));
            }
            b
        })
        .collect()
}

/// `k` distinct uniformly random strings (`k` must not exceed `2^n`).
pub fn random_distinct_bitstrings(n: usize, k: usize, seed: u64) -> Vec<Bitstring> {
    assert!(n >= 64 || (k as u128) <= (1u128 << n), "cannot draw {k} distinct strings of length {n}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::HashSet::with_capacity(k);
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let mut b = Bitstring::zeros(n);
        for q in 0..n {
            b.set(q, rng.gen_range(0..2u8));
        }
        if seen.insert(b) {
            out.push(b);
        }
    }
    out
}

/// Distinct strings in first-seen order, plus the position of every input in
/// that distinct list.
pub fn dedup(list: &[Bitstring]) -> (Vec<Bitstring>, Vec<usize>) {
    let mut pos: HashMap<Bitstring, usize> = HashMap::with_capacity(list.len());
    let mut distinct = Vec::new();
    let map = list
        .iter()
        .map(|b| {
            *pos.entry(*b).or_insert_with(|| {
                distinct.push(*b);
                distinct.len() - 1
            })
        })
        .collect();
    (distinct, map)
}
