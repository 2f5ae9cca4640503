//! Benchmark target states and the plain-text amplitude format.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{check_qubit_count, StateVector};

/// Discretized Gaussian over basis indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub n_qubits: usize,
    /// Mean, in basis-index units.
    pub mean: f64,
    /// Standard deviation, in basis-index units.
    pub std_dev: f64,
}

impl GaussianSpec {
    /// Mean `2ⁿ/2`, standard deviation `2ⁿ/8`.
    pub fn centered(n_qubits: usize) -> Self {
        let dim = (1u64 << n_qubits) as f64;
        Self { n_qubits, mean: dim / 2.0, std_dev: dim / 8.0 }
    }
}

/// Amplitudes proportional to the normal density `g(x)` at each basis index,
/// renormalized to a unit vector.
pub fn gaussian_state(spec: &GaussianSpec) -> Result<StateVector> {
    check_qubit_count(spec.n_qubits)?;
    if spec.std_dev.is_nan() || spec.std_dev <= 0.0 || !spec.mean.is_finite() {
        return Err(Error::InvalidConfig(format!("gaussian needs σ > 0, got {}", spec.std_dev)));
    }
    let norm = 1.0 / (spec.std_dev * (2.0 * std::f64::consts::PI).sqrt());
    let weights: Vec<f64> = (0..1usize << spec.n_qubits)
        .map(|x| {
            let z = (x as f64 - spec.mean) / spec.std_dev;
            norm * (-0.5 * z * z).exp()
        })
        .collect();
    StateVector::from_real(&weights)
}

/// Equal superposition of the `n` Hamming-weight-one basis states.
pub fn w_state(n: usize) -> Result<StateVector> {
    if n < 2 {
        return Err(Error::InvalidQubitCount(n));
    }
    check_qubit_count(n)?;
    let mut weights = vec![0.0; 1 << n];
    for q in 0..n {
        weights[1 << q] = 1.0;
    }
    StateVector::from_real(&weights)
}

/// Relative norm deviation above which [`parse_state`] logs a warning.
pub const RENORMALIZE_WARN: f64 = 1e-6;

/// Parses whitespace-separated amplitudes (`a`, `a+bi`, `a-bi`, `bi`); `#`
/// starts a comment. The vector is renormalized.
pub fn parse_state(text: &str) -> Result<StateVector> {
    let mut amplitudes = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for token in line.split_whitespace() {
            let value =
                parse_complex(token).ok_or_else(|| Error::MalformedNumber { token: token.to_owned(), line: i + 1 })?;
            amplitudes.push(value);
        }
    }
    if amplitudes.len() < 2 || !amplitudes.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(amplitudes.len()));
    }
    let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
    if norm_sqr > 0.0 && (norm_sqr.sqrt() - 1.0).abs() > RENORMALIZE_WARN {
        log::warn!("target norm is {:.6}; renormalizing", norm_sqr.sqrt());
    }
    StateVector::normalized(amplitudes)
}

fn parse_complex(token: &str) -> Option<Complex64> {
    let Some(body) = token.strip_suffix(['i', 'j']) else {
        return parse_real(token).map(|re| Complex64::new(re, 0.0));
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split =
        (1..bytes.len()).rev().find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = parse_real(&body[..k])?;
            let im = match &body[k..] {
                "+" => 1.0,
                "-" => -1.0,
                s => parse_real(s)?,
            };
            Some(Complex64::new(re, im))
        }
        None => {
            let im = match body {
                "" | "+" => 1.0,
                "-" => -1.0,
                s => parse_real(s)?,
            };
            Some(Complex64::new(0.0, im))
        }
    }
}

fn parse_real(s: &str) -> Option<f64> {
    // reject words like "inf" and "nan" that f64::from_str accepts
    if !s.bytes().all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'e' | b'E' | b'+' | b'-')) {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}
