//! Continuous optimization of an individual's rotation angles.
//!
//! The objective is the fidelity `f(θ) = |⟨target|U(θ)|0⟩|²`. Every rotation
//! is `exp(−iθσ/2)`, so `∂f/∂θ_j = [f(θ_j + π/2) − f(θ_j − π/2)] / 2` exactly.
//! The shifted fidelities for all parameters are obtained from one forward
//! and one backward sweep: with `ψ_j` the state after gate `j` and
//! `χ_j = U_{j+1}† ⋯ U_L† |target⟩`, the shifted overlap is
//! `⟨χ_j|R(±π/2)|ψ_j⟩ = (a ∓ i⟨χ_j|σ|ψ_j⟩)/√2` where `a = ⟨target|ψ_L⟩`.
//!
//! The maximizer is L-BFGS with an Armijo backtracking line search. `f` is
//! 2π-periodic in every angle up to a global phase, so the box `[0, 2π]` is
//! treated as a torus and angles are wrapped on return.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genome::{Gene, Individual};
use crate::sim::{self, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    /// Cap on objective evaluations (forward simulations) per start.
    pub max_evals: usize,
    /// Stop once the largest gradient component falls below this.
    pub gradient_tolerance: f64,
    /// Number of starts; starts after the first use random angles.
    pub restarts: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self { max_evals: 300, gradient_tolerance: 1e-6, restarts: 1 }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        if self.max_evals < 1 {
            return Err(Error::InvalidConfig("optimizer max_evals must be ≥ 1".into()));
        }
        if self.gradient_tolerance.is_nan() || self.gradient_tolerance < 0.0 {
            return Err(Error::InvalidConfig("gradient tolerance must be ≥ 0".into()));
        }
        Ok(())
    }
}

/// Fidelity of a fixed gate structure as a function of its rotation angles.
struct Objective<'a> {
    n_qubits: usize,
    genes: &'a [Gene],
    target: &'a [Complex64],
}

impl<'a> Objective<'a> {
    fn new(ind: &'a Individual, target: &'a StateVector) -> Result<Self> {
        if ind.n_qubits() != target.n_qubits() {
            return Err(Error::DimensionMismatch { left: ind.n_qubits(), right: target.n_qubits() });
        }
        Ok(Self { n_qubits: ind.n_qubits(), genes: ind.genes(), target: target.amplitudes() })
    }

    fn forward(&self, angles: &[f64]) -> Vec<Complex64> {
        let mut psi = sim::zero_amplitudes(self.n_qubits);
        let mut k = 0;
        for gene in self.genes {
            sim::apply_gene_in_place(&mut psi, &with_angle(gene, angles, &mut k));
        }
        psi
    }

    fn value(&self, angles: &[f64]) -> f64 {
        sim::inner(self.target, &self.forward(angles)).norm_sqr()
    }

    fn value_and_gradient(&self, angles: &[f64]) -> (f64, Vec<f64>) {
        let mut psi = self.forward(angles);
        let overlap = sim::inner(self.target, &psi);
        let mut chi = self.target.to_vec();
        let mut grad = vec![0.0; angles.len()];
        let mut k = angles.len();
        for gene in self.genes.iter().rev() {
            let gene = match *gene {
                Gene::Rotation { axis, target, .. } => {
                    k -= 1;
                    let sigma = sim::pauli_matrix_element(&chi, &psi, axis, target);
                    let shift = Complex64::new(0.0, 1.0) * sigma;
                    let plus = (overlap - shift) * FRAC_1_SQRT_2;
                    let minus = (overlap + shift) * FRAC_1_SQRT_2;
                    grad[k] = 0.5 * (plus.norm_sqr() - minus.norm_sqr());
                    Gene::Rotation { axis, target, angle: angles[k] }
                }
                cnot => cnot,
            };
            sim::apply_gene_inverse_in_place(&mut psi, &gene);
            sim::apply_gene_inverse_in_place(&mut chi, &gene);
        }
        (overlap.norm_sqr(), grad)
    }
}

fn with_angle(gene: &Gene, angles: &[f64], k: &mut usize) -> Gene {
    match *gene {
        Gene::Rotation { axis, target, .. } => {
            let g = Gene::Rotation { axis, target, angle: angles[*k] };
            *k += 1;
            g
        }
        cnot => cnot,
    }
}

/// `∂f/∂θ_j` for every rotation gene, in gene order.
pub fn fitness_gradient(ind: &Individual, target: &StateVector) -> Result<Vec<f64>> {
    let objective = Objective::new(ind, target)?;
    Ok(objective.value_and_gradient(&ind.angles()).1)
}

/// Fidelity and its gradient in one sweep.
pub fn fitness_and_gradient(ind: &Individual, target: &StateVector) -> Result<(f64, Vec<f64>)> {
    let objective = Objective::new(ind, target)?;
    Ok(objective.value_and_gradient(&ind.angles()))
}

/// Locally maximizes the fidelity over the rotation angles of `ind`.
///
/// Gate kinds, qubits and order are preserved; the returned individual has
/// its fitness cached and never scores below the input.
pub fn optimize_angles(ind: &Individual, target: &StateVector, settings: &OptimizerSettings) -> Result<Individual> {
    settings.validate()?;
    let objective = Objective::new(ind, target)?;
    let start = ind.angles();
    // cached fitness is clamped like sim::fidelity
    let start_value = objective.value(&start).min(1.0);
    if start.is_empty() {
        let mut out = ind.clone();
        out.set_fitness(start_value);
        return Ok(out);
    }

    let (mut best_x, mut best_f) = lbfgs_maximize(&objective, start, settings);
    if settings.restarts > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(structure_seed(ind));
        for _ in 1..settings.restarts {
            let x0: Vec<f64> = (0..best_x.len()).map(|_| rng.random_range(0.0..TAU)).collect();
            let (x, f) = lbfgs_maximize(&objective, x0, settings);
            if f > best_f {
                best_x = x;
                best_f = f;
            }
        }
    }

    let mut out = ind.with_angles(&best_x);
    let wrapped = objective_value(&out, target);
    if wrapped < start_value {
        // only possible through rounding in the wrap; keep the input
        let mut out = ind.clone();
        out.set_fitness(start_value);
        return Ok(out);
    }
    out.set_fitness(wrapped);
    Ok(out)
}

fn objective_value(ind: &Individual, target: &StateVector) -> f64 {
    Objective { n_qubits: ind.n_qubits(), genes: ind.genes(), target: target.amplitudes() }.value(&ind.angles()).min(1.0)
}

fn structure_seed(ind: &Individual) -> u64 {
    // FNV-1a over the gene encoding
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |v: u64| {
        h ^= v;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    };
    for g in ind.genes() {
        feed(g.kind() as u64);
        feed(g.target() as u64);
        feed(g.control().map_or(u64::MAX, |c| c as u64));
        feed(g.angle().map_or(0, f64::to_bits));
    }
    h
}

const MEMORY: usize = 8;
const ARMIJO: f64 = 1e-4;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// L-BFGS ascent from `x`. Returns the final point and its value, which is
/// never below the value at the start.
fn lbfgs_maximize(objective: &Objective<'_>, mut x: Vec<f64>, settings: &OptimizerSettings) -> (Vec<f64>, f64) {
    let (mut f, mut g) = objective.value_and_gradient(&x);
    let mut evals = 1;
    let mut memory: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::with_capacity(MEMORY);

    while evals < settings.max_evals {
        if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= settings.gradient_tolerance {
            break;
        }
        let mut dir = two_loop(&g, &memory);
        let mut slope = dot(&dir, &g);
        if slope <= 0.0 {
            memory.clear();
            dir = g.clone();
            slope = dot(&g, &g);
        }

        let mut step = 1.0;
        let mut accepted = None;
        while evals < settings.max_evals {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let ft = objective.value(&trial);
            evals += 1;
            if ft >= f + ARMIJO * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
            if step < 1e-10 {
                break;
            }
        }
        let Some((x_new, _)) = accepted else {
            if memory.is_empty() {
                break;
            }
            memory.clear();
            continue;
        };
        if evals >= settings.max_evals {
            let f_new = objective.value(&x_new);
            if f_new > f {
                x = x_new;
                f = f_new;
            }
            break;
        }

        let (f_new, g_new) = objective.value_and_gradient(&x_new);
        evals += 1;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        // curvature pair for the minimization of −f
        let y: Vec<f64> = g.iter().zip(&g_new).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if memory.len() == MEMORY {
                memory.remove(0);
            }
            memory.push((s, y, 1.0 / sy));
        }
        let improvement = f_new - f;
        x = x_new;
        f = f_new;
        g = g_new;
        if improvement.abs() < 1e-15 && f > 1.0 - 1e-12 {
            break;
        }
    }
    (x, f)
}

/// Applies the inverse-Hessian estimate of −f to the ascent direction `g`.
fn two_loop(g: &[f64], memory: &[(Vec<f64>, Vec<f64>, f64)]) -> Vec<f64> {
    let mut q = g.to_vec();
    if memory.is_empty() {
        return q;
    }
    let mut alpha = vec![0.0; memory.len()];
    for (i, (s, y, rho)) in memory.iter().enumerate().rev() {
        alpha[i] = rho * dot(s, &q);
        for (qj, yj) in q.iter_mut().zip(y) {
            *qj -= alpha[i] * yj;
        }
    }
    let (s, y, _) = memory.last().unwrap();
    let gamma = dot(s, y) / dot(y, y);
    for qj in &mut q {
        *qj *= gamma;
    }
    for (i, (s, y, rho)) in memory.iter().enumerate() {
        let beta = rho * dot(y, &q);
        for (qj, sj) in q.iter_mut().zip(s) {
            *qj += (alpha[i] - beta) * sj;
        }
    }
    q
}
