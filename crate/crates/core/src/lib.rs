//! Genetic-algorithm synthesis of low-depth quantum state-preparation
//! circuits over the {Rx, Ry, Rz, CNOT} gate set.
//!
//! A genome is a gate list ([`Individual`]). [`evolve`] searches circuit
//! structures with crossover, mutation and roulette selection while
//! [`optimize_angles`] fits the rotation angles of each candidate. The
//! [`baseline`] module provides an exact synthesizer for comparison and
//! [`noise`] samples circuits under a stochastic Pauli error model.

pub mod baseline;
pub mod bench;
pub mod error;
pub mod evolution;
pub mod genome;
pub mod noise;
pub mod optimizer;
pub mod rng;
pub mod sim;
pub mod targets;

pub use baseline::{disentangle_angles, exact_synthesize, AngleTree};
pub use bench::{
    aggregate, classical_fidelity, run_benchmark, total_variation, write_csv, Aggregate, BenchResult, BenchRow, Family,
    Histogram, MeanErr, Method,
};
pub use error::{Error, Result};
pub use evolution::{crossover, evolve, mutate, select, EvolutionConfig, RunReport};
pub use genome::{parse_qasm, random_gene, random_individual, stats, to_qasm, Axis, CircuitStats, Gene, Individual};
pub use noise::{sample_counts, sample_counts_seeded, Counts, NoiseModel};
pub use optimizer::{fitness_and_gradient, fitness_gradient, optimize_angles, OptimizerSettings};
pub use sim::{apply_gate, fidelity, probabilities, run_circuit, GateKind, StateVector};
pub use targets::{gaussian_state, parse_state, w_state, GaussianSpec};
