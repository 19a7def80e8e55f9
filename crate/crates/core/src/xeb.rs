//! Linear cross-entropy fidelity, the fidelity-weighted Porter-Thomas law,
//! and histogram data of rescaled probabilities.
//!
//! With `x = N·p` distributed as `(F·x + 1 − F)·e^{−x}`, the mean of `x` is
//! `1 + F`, so `F̂ = mean(N·p) − 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum XebError {
    #[error("need at least 2 probabilities, got {0}")]
    TooFew(usize),
    #[error("probability {index} is negative ({value})")]
    Negative { index: usize, value: f64 },
    #[error("rescaled probability must be non-negative, got {0}")]
    NegativeX(f64),
    #[error("histogram needs at least one bin")]
    NoBins,
    #[error("no probabilities given")]
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct XebEstimate {
    pub f_xeb: f64,
    /// Standard error of the mean of `N·p`.
    pub stderr: f64,
    pub k: usize,
    pub n_qubits: usize,
    /// `N = 2^n`.
    pub n_states: f64,
}

impl XebEstimate {
    /// `|F̂ − target| ≤ sigmas · stderr`.
    pub fn consistent_with(&self, target: f64, sigmas: f64) -> bool {
        (self.f_xeb - target).abs() <= sigmas * self.stderr
    }
}

fn n_states(n: usize) -> f64 {
    2f64.powi(n as i32)
}

/// `F̂ = mean(N·p) − 1` with the sample standard error of `N·p`.
pub fn xeb_estimate(probs: &[f64], n: usize) -> Result<XebEstimate, XebError> {
    let k = probs.len();
    if k < 2 {
        return Err(XebError::TooFew(k));
    }
    if let Some((index, &value)) = probs.iter().enumerate().find(|(_, &p)| p < 0.0) {
        return Err(XebError::Negative { index, value });
    }
    let big_n = n_states(n);
    let mean = probs.iter().map(|&p| big_n * p).sum::<f64>() / k as f64;
    let var = probs.iter().map(|&p| (big_n * p - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    Ok(XebEstimate { f_xeb: mean - 1.0, stderr: (var / k as f64).sqrt(), k, n_qubits: n, n_states: big_n })
}

/// Density of `x = N·p` at fidelity `f`: `(f·x + 1 − f)·e^{−x}`.
pub fn porter_thomas_pdf(x: f64, f: f64) -> Result<f64, XebError> {
    if x < 0.0 {
        return Err(XebError::NegativeX(x));
    }
    Ok((f * x + 1.0 - f) * (-x).exp())
}

/// Distribution function of [`porter_thomas_pdf`].
pub fn porter_thomas_cdf(x: f64, f: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let e = (-x).exp();
    f * (1.0 - (1.0 + x) * e) + (1.0 - f) * (1.0 - e)
}

/// Kolmogorov-Smirnov distance between the samples and `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let k = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / k).max((i + 1) as f64 / k - c)
        })
        .fold(0.0, f64::max)
}

/// Critical KS distance at the 1% level for `k` samples.
pub fn ks_critical_1pct(k: usize) -> f64 {
    1.63 / (k as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramData {
    /// `bins + 1` edges in `x = N·p`.
    pub edges: Vec<f64>,
    pub centers: Vec<f64>,
    /// Fraction of samples per bin divided by bin width.
    pub empirical: Vec<f64>,
    pub theory: Vec<f64>,
    /// Fidelity used for the theory curve.
    pub f_xeb: f64,
}

impl HistogramData {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("center,empirical_density,theory_density\n");
        for i in 0..self.centers.len() {
            s.push_str(&format!("{:.10e},{:.10e},{:.10e}\n", self.centers[i], self.empirical[i], self.theory[i]));
        }
        s
    }
}

/// Histogram of `x = N·p` with the theory density at each bin center, using
/// the fidelity estimated from the same probabilities (0 for a single sample).
///
/// Log bins span the smallest positive to the largest `x`, and centers are
/// geometric means; samples with `x = 0` are counted in the first bin.
pub fn histogram_rescaled(probs: &[f64], n: usize, bins: usize, log_x: bool) -> Result<HistogramData, XebError> {
    if probs.is_empty() {
        return Err(XebError::Empty);
    }
    if bins == 0 {
        return Err(XebError::NoBins);
    }
    if let Some((index, &value)) = probs.iter().enumerate().find(|(_, &p)| p < 0.0) {
        return Err(XebError::Negative { index, value });
    }
    let f = if probs.len() >= 2 { xeb_estimate(probs, n)?.f_xeb } else { 0.0 };
    let big_n = n_states(n);
    let xs: Vec<f64> = probs.iter().map(|&p| big_n * p).collect();
    let hi = xs.iter().copied().fold(0.0, f64::max);

    let edges: Vec<f64> = if log_x {
        let lo = xs.iter().copied().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min);
        let (lo, hi) = if !lo.is_finite() {
            (1e-3, 1.0)
        } else if lo == hi {
            (lo / 2.0, hi * 2.0)
        } else {
            (lo, hi)
        };
        let (a, b) = (lo.ln(), hi.ln());
        (0..=bins).map(|i| (a + (b - a) * i as f64 / bins as f64).exp()).collect()
    } else {
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let (lo, hi) = if lo == hi { ((lo - 0.5).max(0.0), hi + 0.5) } else { (lo, hi) };
        (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect()
    };

    let mut counts = vec![0usize; bins];
    for &x in &xs {
        let i = edges[1..].partition_point(|&e| e < x).min(bins - 1);
        counts[i] += 1;
    }
    let k = xs.len() as f64;
    let mut centers = Vec::with_capacity(bins);
    let mut empirical = Vec::with_capacity(bins);
    let mut theory = Vec::with_capacity(bins);
    for i in 0..bins {
        let (a, b) = (edges[i], edges[i + 1]);
        let c = if log_x { (a * b).sqrt() } else { 0.5 * (a + b) };
        centers.push(c);
        empirical.push(counts[i] as f64 / (k * (b - a)));
        theory.push(porter_thomas_pdf(c, f)?);
    }
    Ok(HistogramData { edges, centers, empirical, theory, f_xeb: f })
}

/// Basis-state indices drawn from the distribution `probs`.
pub fn sample_ideal(probs: &[f64], k: usize, seed: u64) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k)
        .map(|_| {
            let u = rng.gen::<f64>() * total;
            cdf.partition_point(|&c| c <= u).min(probs.len() - 1)
        })
        .collect()
}

/// Uniformly random basis-state indices out of `n_states`.
pub fn sample_uniform(n_states: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k).map(|_| rng.gen_range(0..n_states)).collect()
}

/// Each index comes from `probs` with probability `f`, else uniformly.
pub fn sample_mixture(probs: &[f64], k: usize, f: f64, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ideal = sample_ideal(probs, k, seed.wrapping_add(1));
    let uniform = sample_uniform(probs.len(), k, seed.wrapping_add(2));
    (0..k).map(|i| if rng.gen::<f64>() < f { ideal[i] } else { uniform[i] }).collect()
}
