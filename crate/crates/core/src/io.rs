//! Amplitude files (JSON lines) and run summaries.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitstring::Bitstring;
use crate::exec::AmplitudeSet;
use crate::tensor::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IoError {
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
}

/// Shortest exact form: 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// One line of an amplitude file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeRecord {
    pub bitstring: String,
    pub re: f64,
    pub im: f64,
    pub p: f64,
}

impl AmplitudeRecord {
    pub fn amplitude(&self) -> C64 {
        C64::new(self.re, self.im)
    }
}

fn line(bitstring: &Bitstring, a: C64, p: f64) -> String {
    format!(
        "{{\"bitstring\": \"{}\", \"re\": {}, \"im\": {}, \"p\": {}}}\n",
        bitstring,
        format_f64(a.re),
        format_f64(a.im),
        format_f64(p)
    )
}

/// JSON lines, one per requested bitstring in request order.
pub fn amplitudes_jsonl(set: &AmplitudeSet) -> String {
    set.entries.iter().map(|e| line(&e.bitstring, e.amplitude, e.probability)).collect()
}

/// Same format for plain `(bitstring, amplitude)` pairs.
pub fn pairs_jsonl(pairs: &[(Bitstring, C64)]) -> String {
    pairs.iter().map(|(b, a)| line(b, *a, a.norm_sqr())).collect()
}

pub fn parse_amplitudes_jsonl(text: &str) -> Result<Vec<AmplitudeRecord>, IoError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| IoError::Line { line: i + 1, msg: e.to_string() }))
        .collect()
}
