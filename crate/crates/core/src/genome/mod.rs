//! Circuit genomes: genes, individuals, circuit statistics and QASM I/O.

mod qasm;

pub use qasm::{parse_qasm, to_qasm};

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{self, check_qubit_count, GateKind, StateVector};

/// Rotation axis of a single-qubit gene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn gate_kind(self) -> GateKind {
        match self {
            Axis::X => GateKind::Rx,
            Axis::Y => GateKind::Ry,
            Axis::Z => GateKind::Rz,
        }
    }
}

/// One gate application.
///
/// Rotations carry an angle and no control; CNOTs carry a control and no
/// angle, so the two shapes are separate variants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gene {
    Rotation { axis: Axis, target: usize, angle: f64 },
    Cnot { control: usize, target: usize },
}

impl Gene {
    pub fn rx(target: usize, angle: f64) -> Self {
        Gene::Rotation { axis: Axis::X, target, angle }
    }

    pub fn ry(target: usize, angle: f64) -> Self {
        Gene::Rotation { axis: Axis::Y, target, angle }
    }

    pub fn rz(target: usize, angle: f64) -> Self {
        Gene::Rotation { axis: Axis::Z, target, angle }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gene::Cnot { control, target }
    }

    pub fn kind(&self) -> GateKind {
        match self {
            Gene::Rotation { axis, .. } => axis.gate_kind(),
            Gene::Cnot { .. } => GateKind::Cnot,
        }
    }

    pub fn target(&self) -> usize {
        match *self {
            Gene::Rotation { target, .. } | Gene::Cnot { target, .. } => target,
        }
    }

    pub fn control(&self) -> Option<usize> {
        match *self {
            Gene::Cnot { control, .. } => Some(control),
            Gene::Rotation { .. } => None,
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gene::Rotation { angle, .. } => Some(angle),
            Gene::Cnot { .. } => None,
        }
    }

    pub fn is_rotation(&self) -> bool {
        matches!(self, Gene::Rotation { .. })
    }

    pub(crate) fn check_qubits(&self, n_qubits: usize) -> Result<()> {
        let target = self.target();
        if target >= n_qubits {
            return Err(Error::QubitOutOfRange { index: target, n_qubits });
        }
        if let Some(control) = self.control() {
            if control >= n_qubits {
                return Err(Error::QubitOutOfRange { index: control, n_qubits });
            }
            if control == target {
                return Err(Error::ControlIsTarget(target));
            }
        }
        Ok(())
    }

    /// Full validity check, including a finite angle in `[0, 2π)`.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        self.check_qubits(n_qubits)?;
        if let Some(angle) = self.angle() {
            if !angle.is_finite() || !(0.0..TAU).contains(&angle) {
                return Err(Error::NonFiniteAngle(angle));
            }
        }
        Ok(())
    }

    fn canonical(self) -> Self {
        match self {
            Gene::Rotation { axis, target, angle } => Gene::Rotation { axis, target, angle: wrap_angle(angle) },
            cnot => cnot,
        }
    }
}

/// Maps an angle onto `[0, 2π)`.
pub fn wrap_angle(angle: f64) -> f64 {
    let wrapped = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if wrapped >= TAU {
        0.0
    } else {
        wrapped
    }
}

/// Draws a uniformly random gene. CNOT is excluded on a single qubit.
pub fn random_gene<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<Gene> {
    if n_qubits < 1 {
        return Err(Error::InvalidQubitCount(n_qubits));
    }
    let kinds = if n_qubits == 1 { 3 } else { 4 };
    let target = rng.random_range(0..n_qubits);
    let gene = match GateKind::ALL[rng.random_range(0..kinds)] {
        GateKind::Cnot => {
            // uniform over the n-1 qubits other than the target
            let mut control = rng.random_range(0..n_qubits - 1);
            if control >= target {
                control += 1;
            }
            Gene::cnot(control, target)
        }
        kind => {
            let angle = rng.random_range(0.0..TAU);
            match kind {
                GateKind::Rx => Gene::rx(target, angle),
                GateKind::Ry => Gene::ry(target, angle),
                _ => Gene::rz(target, angle),
            }
        }
    };
    Ok(gene)
}

/// A candidate circuit: an ordered gene sequence with a cached fitness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    n_qubits: usize,
    genes: Vec<Gene>,
    #[serde(skip)]
    fitness: Option<f64>,
}

impl Individual {
    /// Validates `genes` against the register size. Angles are wrapped into `[0, 2π)`.
    pub fn new(n_qubits: usize, genes: Vec<Gene>) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        let genes = genes
            .into_iter()
            .map(|g| {
                g.check_qubits(n_qubits)?;
                match g.angle() {
                    Some(a) if !a.is_finite() => Err(Error::NonFiniteAngle(a)),
                    _ => Ok(g.canonical()),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n_qubits, genes, fitness: None })
    }

    pub fn empty(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, Vec::new())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn genes(&self) -> &[Gene] {
        &self.genes
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    /// Cached fitness, if it has been evaluated since the last gene change.
    pub fn fitness(&self) -> Option<f64> {
        self.fitness
    }

    /// Replaces gene `index`, clearing the fitness cache.
    pub fn set_gene(&mut self, index: usize, gene: Gene) -> Result<()> {
        gene.check_qubits(self.n_qubits)?;
        self.genes[index] = gene.canonical();
        self.fitness = None;
        Ok(())
    }

    /// Computes and caches the fidelity of this circuit's output with `target`.
    pub fn evaluate(&mut self, target: &StateVector) -> Result<f64> {
        let f = sim::fidelity(target, &self.state()?)?;
        self.fitness = Some(f);
        Ok(f)
    }

    /// The state this circuit prepares from `|0…0⟩`.
    pub fn state(&self) -> Result<StateVector> {
        sim::run_circuit(&self.genes, self.n_qubits)
    }

    pub fn rotation_count(&self) -> usize {
        self.genes.iter().filter(|g| g.is_rotation()).count()
    }

    /// Rotation angles in gene order.
    pub fn angles(&self) -> Vec<f64> {
        self.genes.iter().filter_map(Gene::angle).collect()
    }

    /// Same structure with the rotation angles replaced in order. Angles are
    /// wrapped and the fitness cache cleared.
    pub fn with_angles(&self, angles: &[f64]) -> Self {
        let mut it = angles.iter();
        let genes = self
            .genes
            .iter()
            .map(|g| match *g {
                Gene::Rotation { axis, target, .. } => {
                    let angle = *it.next().expect("angle count matches rotation count");
                    Gene::Rotation { axis, target, angle: wrap_angle(angle) }
                }
                cnot => cnot,
            })
            .collect();
        Self { n_qubits: self.n_qubits, genes, fitness: None }
    }

    pub(crate) fn from_parts(n_qubits: usize, genes: Vec<Gene>) -> Self {
        Self { n_qubits, genes, fitness: None }
    }

    pub(crate) fn genes_mut(&mut self) -> &mut Vec<Gene> {
        self.fitness = None;
        &mut self.genes
    }

    pub(crate) fn set_fitness(&mut self, fitness: f64) {
        self.fitness = Some(fitness);
    }

    pub fn stats(&self) -> CircuitStats {
        stats(self)
    }
}

/// Draws an individual of `length` independent random genes.
pub fn random_individual<R: Rng + ?Sized>(n_qubits: usize, length: usize, rng: &mut R) -> Result<Individual> {
    check_qubit_count(n_qubits)?;
    let genes = (0..length).map(|_| random_gene(n_qubits, rng)).collect::<Result<Vec<_>>>()?;
    Ok(Individual::from_parts(n_qubits, genes))
}

/// Gate count, CNOT count and ASAP-layered depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CircuitStats {
    pub total_gates: usize,
    pub cnot_count: usize,
    pub depth: usize,
}

pub fn stats(ind: &Individual) -> CircuitStats {
    let mut layer = vec![0usize; ind.n_qubits];
    let mut depth = 0;
    let mut cnot_count = 0;
    for gene in &ind.genes {
        let t = gene.target();
        let start = match gene.control() {
            Some(c) => {
                cnot_count += 1;
                let l = layer[c].max(layer[t]) + 1;
                layer[c] = l;
                l
            }
            None => layer[t] + 1,
        };
        layer[t] = start;
        depth = depth.max(start);
    }
    CircuitStats { total_gates: ind.genes.len(), cnot_count, depth }
}
