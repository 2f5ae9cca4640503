//! Dense statevector simulation over the {Rx, Ry, Rz, CNOT} gate set.
//!
//! Basis index `x` encodes qubit 0 as its least significant bit. Rotations
//! follow the half-angle convention `Rα(θ) = exp(−iθσα/2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genome::{Axis, Gene};

/// Norm tolerance enforced when a state is constructed from caller data.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 24;

/// The four gate kinds a gene can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    Cnot,
}

impl GateKind {
    pub const ALL: [GateKind; 4] = [GateKind::Rx, GateKind::Ry, GateKind::Rz, GateKind::Cnot];

    pub fn is_rotation(self) -> bool {
        !matches!(self, GateKind::Cnot)
    }

    /// Lower-case OpenQASM mnemonic.
    pub fn mnemonic(self) -> &'static str {
        match self {
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::Cnot => "cx",
        }
    }
}

/// A normalized n-qubit pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Wraps `amplitudes`, which must already have unit norm.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n_qubits = qubits_for_len(amplitudes.len())?;
        let norm_sqr = norm_sqr(&amplitudes);
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm_sqr));
        }
        Ok(Self { n_qubits, amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let n_qubits = qubits_for_len(amplitudes.len())?;
        let norm = norm_sqr(&amplitudes).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Ok(Self { n_qubits, amplitudes })
    }

    /// Real amplitudes, rescaled to unit norm.
    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::normalized(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::QubitOutOfRange { index, n_qubits });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amplitudes })
    }

    pub(crate) fn from_raw(n_qubits: usize, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << n_qubits);
        Self { n_qubits, amplitudes }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    /// True when every amplitude is real and non-negative.
    pub fn is_real_nonnegative(&self) -> bool {
        self.amplitudes.iter().all(|a| a.im == 0.0 && a.re >= 0.0)
    }
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    let n = len.trailing_zeros() as usize;
    check_qubit_count(n)?;
    Ok(n)
}

pub(crate) fn check_qubit_count(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::InvalidQubitCount(n_qubits));
    }
    Ok(())
}

fn norm_sqr(amplitudes: &[Complex64]) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum()
}

/// Returns `U|ψ⟩` for the gate encoded by `gene`. The input is left untouched.
pub fn apply_gate(state: &StateVector, gene: &Gene) -> Result<StateVector> {
    gene.check_qubits(state.n_qubits)?;
    if let Some(angle) = gene.angle() {
        if !angle.is_finite() {
            return Err(Error::NonFiniteAngle(angle));
        }
    }
    let mut amplitudes = state.amplitudes.clone();
    apply_gene_in_place(&mut amplitudes, gene);
    Ok(StateVector::from_raw(state.n_qubits, amplitudes))
}

/// Folds `genes` over `|0⟩^⊗n`.
pub fn run_circuit(genes: &[Gene], n_qubits: usize) -> Result<StateVector> {
    check_qubit_count(n_qubits)?;
    for gene in genes {
        gene.check_qubits(n_qubits)?;
        if let Some(angle) = gene.angle() {
            if !angle.is_finite() {
                return Err(Error::NonFiniteAngle(angle));
            }
        }
    }
    let mut amplitudes = zero_amplitudes(n_qubits);
    for gene in genes {
        apply_gene_in_place(&mut amplitudes, gene);
    }
    Ok(StateVector::from_raw(n_qubits, amplitudes))
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::DimensionMismatch { left: a.n_qubits, right: b.n_qubits });
    }
    Ok(inner(&a.amplitudes, &b.amplitudes).norm_sqr().min(1.0))
}

/// Born-rule outcome probabilities, indexed by basis state.
pub fn probabilities(state: &StateVector) -> Vec<f64> {
    state.amplitudes.iter().map(|a| a.norm_sqr()).collect()
}

// ---------------------------------------------------------------------------
// In-place kernels. These skip validation; callers check qubit indices.

pub(crate) fn zero_amplitudes(n_qubits: usize) -> Vec<Complex64> {
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
    amplitudes[0] = Complex64::new(1.0, 0.0);
    amplitudes
}

/// `⟨a|b⟩ = Σ conj(a_x) b_x`.
pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn apply_gene_in_place(amplitudes: &mut [Complex64], gene: &Gene) {
    match *gene {
        Gene::Rotation { axis, target, angle } => apply_rotation(amplitudes, axis, target, angle),
        Gene::Cnot { control, target } => apply_cnot(amplitudes, control, target),
    }
}

/// Applies the inverse of `gene`.
pub(crate) fn apply_gene_inverse_in_place(amplitudes: &mut [Complex64], gene: &Gene) {
    match *gene {
        Gene::Rotation { axis, target, angle } => apply_rotation(amplitudes, axis, target, -angle),
        Gene::Cnot { control, target } => apply_cnot(amplitudes, control, target),
    }
}

#[inline]
fn for_each_pair(amplitudes: &mut [Complex64], qubit: usize, mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
    let stride = 1usize << qubit;
    for block in amplitudes.chunks_exact_mut(stride << 1) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            f(a0, a1);
        }
    }
}

pub(crate) fn apply_rotation(amplitudes: &mut [Complex64], axis: Axis, qubit: usize, angle: f64) {
    let (s, c) = (angle * 0.5).sin_cos();
    match axis {
        Axis::X => for_each_pair(amplitudes, qubit, |a0, a1| {
            // [[c, -is], [-is, c]]
            let (x0, x1) = (*a0, *a1);
            *a0 = Complex64::new(c * x0.re + s * x1.im, c * x0.im - s * x1.re);
            *a1 = Complex64::new(c * x1.re + s * x0.im, c * x1.im - s * x0.re);
        }),
        Axis::Y => for_each_pair(amplitudes, qubit, |a0, a1| {
            let (x0, x1) = (*a0, *a1);
            *a0 = x0 * c - x1 * s;
            *a1 = x0 * s + x1 * c;
        }),
        Axis::Z => {
            let phase0 = Complex64::new(c, -s);
            let phase1 = Complex64::new(c, s);
            for_each_pair(amplitudes, qubit, |a0, a1| {
                *a0 *= phase0;
                *a1 *= phase1;
            })
        }
    }
}

pub(crate) fn apply_cnot(amplitudes: &mut [Complex64], control: usize, target: usize) {
    let cmask = 1usize << control;
    let tmask = 1usize << target;
    for i in 0..amplitudes.len() {
        if i & cmask != 0 && i & tmask == 0 {
            amplitudes.swap(i, i | tmask);
        }
    }
}

/// `⟨χ|σ_axis on qubit|ψ⟩` without materializing `σ|ψ⟩`.
pub(crate) fn pauli_matrix_element(chi: &[Complex64], psi: &[Complex64], axis: Axis, qubit: usize) -> Complex64 {
    let mask = 1usize << qubit;
    let mut acc = Complex64::new(0.0, 0.0);
    match axis {
        Axis::X => {
            for (i, c) in chi.iter().enumerate() {
                acc += c.conj() * psi[i ^ mask];
            }
        }
        Axis::Y => {
            // Y|0⟩ = i|1⟩, Y|1⟩ = -i|0⟩
            for (i, c) in chi.iter().enumerate() {
                let src = psi[i ^ mask];
                let v = if i & mask != 0 { Complex64::new(-src.im, src.re) } else { Complex64::new(src.im, -src.re) };
                acc += c.conj() * v;
            }
        }
        Axis::Z => {
            for (i, c) in chi.iter().enumerate() {
                let v = c.conj() * psi[i];
                if i & mask != 0 {
                    acc -= v;
                } else {
                    acc += v;
                }
            }
        }
    }
    acc
}

/// Applies the Pauli σ_axis to `qubit`.
pub(crate) fn apply_pauli(amplitudes: &mut [Complex64], axis: Axis, qubit: usize) {
    match axis {
        Axis::X => for_each_pair(amplitudes, qubit, std::mem::swap),
        Axis::Y => for_each_pair(amplitudes, qubit, |a0, a1| {
            let (x0, x1) = (*a0, *a1);
            *a0 = Complex64::new(x1.im, -x1.re); // -i·x1
            *a1 = Complex64::new(-x0.im, x0.re); // i·x0
        }),
        Axis::Z => for_each_pair(amplitudes, qubit, |_, a1| *a1 = -*a1),
    }
}
