//! Circuit description, the Sycamore-style gate set and the text file format.

mod network;
pub mod random;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::fmt;

use thiserror::Error;

use crate::tensor::{DenseTensor, Index, C64};

pub use network::{build_tensor_network, TensorNetwork};

/// Largest qubit count accepted anywhere in the engine (bitstrings pack into `u128`).
pub const MAX_QUBITS: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateKind {
    SqrtX,
    SqrtY,
    /// Square root of W = (X + Y)/√2.
    SqrtW,
    FSim { theta: f64, phi: f64 },
    H,
    T,
    Cz,
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::FSim { .. } | GateKind::Cz => 2,
            _ => 1,
        }
    }

    /// Name used in the circuit file format.
    pub fn file_name(&self) -> &'static str {
        match self {
            GateKind::SqrtX => "x_1_2",
            GateKind::SqrtY => "y_1_2",
            GateKind::SqrtW => "hz_1_2",
            GateKind::FSim { .. } => "fs",
            GateKind::H => "h",
            GateKind::T => "t",
            GateKind::Cz => "cz",
        }
    }

    /// Row-major unitary, `2^arity` square. Two-qubit matrices index rows as
    /// `(out_first, out_second)` and columns as `(in_first, in_second)`.
    pub fn matrix(&self) -> Vec<C64> {
        let c = C64::new;
        let half = 0.5;
        match *self {
            GateKind::SqrtX => vec![
                c(half, half),
                c(half, -half),
                c(half, -half),
                c(half, half),
            ],
            GateKind::SqrtY => vec![
                c(half, half),
                c(-half, -half),
                c(half, half),
                c(half, half),
            ],
            GateKind::SqrtW => {
                let s = FRAC_1_SQRT_2;
                let sqrt_i = C64::from_polar(1.0, FRAC_PI_4);
                let sqrt_minus_i = C64::from_polar(1.0, -FRAC_PI_4);
                vec![c(s, 0.0), -sqrt_i * s, sqrt_minus_i * s, c(s, 0.0)]
            }
            GateKind::H => {
                let s = FRAC_1_SQRT_2;
                vec![c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]
            }
            GateKind::T => vec![
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                C64::from_polar(1.0, FRAC_PI_4),
            ],
            GateKind::Cz => {
                let mut m = vec![c(0.0, 0.0); 16];
                m[0] = c(1.0, 0.0);
                m[5] = c(1.0, 0.0);
                m[10] = c(1.0, 0.0);
                m[15] = c(-1.0, 0.0);
                m
            }
            GateKind::FSim { theta, phi } => {
                let mut m = vec![c(0.0, 0.0); 16];
                m[0] = c(1.0, 0.0);
                m[5] = c(theta.cos(), 0.0);
                m[6] = c(0.0, -theta.sin());
                m[9] = c(0.0, -theta.sin());
                m[10] = c(theta.cos(), 0.0);
                m[15] = C64::from_polar(1.0, -phi);
                m
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    /// One or two qubit ids; the first is the more significant matrix bit.
    pub qubits: Vec<usize>,
    pub cycle: u32,
}

impl Gate {
    pub fn one(kind: GateKind, q: usize, cycle: u32) -> Self {
        Gate { kind, qubits: vec![q], cycle }
    }

    pub fn two(kind: GateKind, a: usize, b: usize, cycle: u32) -> Self {
        Gate { kind, qubits: vec![a, b], cycle }
    }
}

/// The gate as a tensor over placeholder indices: outputs first, then inputs.
/// Index ids are `0..arity` for outputs and `arity..2*arity` for inputs.
pub fn gate_matrix(g: &Gate) -> DenseTensor {
    let arity = g.kind.arity() as u32;
    let indices = (0..2 * arity).map(|i| Index::new(i, 2)).collect();
    DenseTensor::new(indices, g.kind.matrix()).expect("gate matrices are square in the qubit dimension")
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown gate `{name}`")]
    UnknownGate { line: usize, name: String },
    #[error("qubit {qubit} used twice in cycle {cycle}")]
    QubitCollision { qubit: usize, cycle: u32 },
    #[error("qubit id {qubit} out of range for a {n}-qubit circuit")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("gate {name} needs {expected} distinct qubits")]
    Arity { name: &'static str, expected: usize },
    #[error("qubit count must be between 1 and {MAX_QUBITS}, got {0}")]
    QubitCount(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    /// Validates and orders the gates by cycle (stable within a cycle).
    pub fn new(n_qubits: usize, mut gates: Vec<Gate>) -> Result<Self, CircuitError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(CircuitError::QubitCount(n_qubits));
        }
        for g in &gates {
            let arity = g.kind.arity();
            if g.qubits.len() != arity || (arity == 2 && g.qubits[0] == g.qubits[1]) {
                return Err(CircuitError::Arity { name: g.kind.file_name(), expected: arity });
            }
            if let Some(&q) = g.qubits.iter().find(|&&q| q >= n_qubits) {
                return Err(CircuitError::QubitOutOfRange { qubit: q, n: n_qubits });
            }
        }
        gates.sort_by_key(|g| g.cycle);
        let mut start = 0;
        while start < gates.len() {
            let cycle = gates[start].cycle;
            let end = start + gates[start..].iter().take_while(|g| g.cycle == cycle).count();
            let mut used = vec![false; n_qubits];
            for g in &gates[start..end] {
                for &q in &g.qubits {
                    if std::mem::replace(&mut used[q], true) {
                        return Err(CircuitError::QubitCollision { qubit: q, cycle });
                    }
                }
            }
            start = end;
        }
        Ok(Circuit { n_qubits, gates })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn depth(&self) -> u32 {
        self.gates.last().map_or(0, |g| g.cycle + 1)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.n_qubits)?;
        for g in &self.gates {
            write!(f, "{} {}", g.cycle, g.kind.file_name())?;
            for q in &g.qubits {
                write!(f, " {q}")?;
            }
            if let GateKind::FSim { theta, phi } = g.kind {
                write!(f, " {theta} {phi}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Parse the whitespace-separated circuit format: a qubit-count header, then
/// `<cycle> <gate> <qubit> [<qubit2>] [<theta> <phi>]` per line.
pub fn parse_circuit(text: &str) -> Result<Circuit, CircuitError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) =
        lines.next().ok_or(CircuitError::Syntax { line: 1, msg: "missing qubit count".into() })?;
    let n: usize = header.parse().map_err(|_| CircuitError::Syntax {
        line: hline,
        msg: format!("expected qubit count, found `{header}`"),
    })?;
    if n == 0 || n > MAX_QUBITS {
        return Err(CircuitError::QubitCount(n));
    }

    let mut gates = Vec::new();
    for (line, text) in lines {
        let fields: Vec<&str> = text.split_whitespace().collect();
        let syntax = |msg: String| CircuitError::Syntax { line, msg };
        if fields.len() < 3 {
            return Err(syntax(format!("expected `<cycle> <gate> <qubit>...`, found `{text}`")));
        }
        let cycle: u32 =
            fields[0].parse().map_err(|_| syntax(format!("bad cycle `{}`", fields[0])))?;
        let name = fields[1];
        let mut nums = Vec::new();
        for f in &fields[2..] {
            nums.push(f.parse::<f64>().map_err(|_| syntax(format!("bad number `{f}`")))?);
        }
        let qubit = |x: f64| -> Result<usize, CircuitError> {
            if x < 0.0 || x.fract() != 0.0 {
                return Err(CircuitError::Syntax { line, msg: format!("bad qubit id `{x}`") });
            }
            let q = x as usize;
            if q >= n {
                return Err(CircuitError::QubitOutOfRange { qubit: q, n });
            }
            Ok(q)
        };
        let kind = match name {
            "x_1_2" => GateKind::SqrtX,
            "y_1_2" => GateKind::SqrtY,
            "hz_1_2" => GateKind::SqrtW,
            "h" => GateKind::H,
            "t" => GateKind::T,
            "cz" => GateKind::Cz,
            "fs" => {
                if nums.len() != 4 {
                    return Err(syntax("fs takes two qubits and two angles".into()));
                }
                GateKind::FSim { theta: nums[2], phi: nums[3] }
            }
            _ => return Err(CircuitError::UnknownGate { line, name: name.to_string() }),
        };
        let arity = kind.arity();
        let expected_fields = if matches!(kind, GateKind::FSim { .. }) { 4 } else { arity };
        if nums.len() != expected_fields {
            return Err(syntax(format!("{name} takes {expected_fields} operand(s), got {}", nums.len())));
        }
        let qubits = nums[..arity].iter().map(|&x| qubit(x)).collect::<Result<Vec<_>, _>>()?;
        if arity == 2 && qubits[0] == qubits[1] {
            return Err(syntax(format!("{name} needs two distinct qubits")));
        }
        gates.push(Gate { kind, qubits, cycle });
    }
    Circuit::new(n, gates)
}
