//! The genetic search over circuit structures.
//!
//! One generation pairs the population at random and crosses each pair over,
//! doubling it; mutates every member of the doubled pool; re-optimizes the
//! angles of everything whose genes changed; then roulette-selects the next
//! population from the pool, carrying the best individual over unchanged.
//! After `maxiter` generations without improvement the genome length grows by
//! one and the population is re-drawn.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genome::{random_gene, random_individual, CircuitStats, Individual};
use crate::optimizer::{optimize_angles, OptimizerSettings};
use crate::rng::substream;
use crate::sim::{self, StateVector};

/// Smallest best-fitness increase that counts as progress.
pub const IMPROVEMENT_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub population_size: usize,
    pub mutation_rate: f64,
    pub fidelity_goal: f64,
    /// Generations without improvement before the genome grows by one gene.
    pub maxiter: usize,
    /// Starting genome length; `None` means three genes per qubit.
    pub initial_length: Option<usize>,
    pub max_total_generations: usize,
    pub seed: u64,
    pub optimizer: OptimizerSettings,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            mutation_rate: 0.05,
            fidelity_goal: 0.99,
            maxiter: 1000,
            initial_length: None,
            max_total_generations: 200_000,
            seed: 0,
            optimizer: OptimizerSettings::default(),
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_owned()));
        if self.population_size < 2 || !self.population_size.is_multiple_of(2) {
            return bad("population size must be even and at least 2");
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad("mutation rate must lie in [0, 1]");
        }
        if !(self.fidelity_goal > 0.0 && self.fidelity_goal <= 1.0) {
            return bad("fidelity goal must lie in (0, 1]");
        }
        if self.maxiter == 0 {
            return bad("maxiter must be at least 1");
        }
        self.optimizer.validate()
    }

    pub fn initial_length_for(&self, n_qubits: usize) -> usize {
        self.initial_length.unwrap_or(3 * n_qubits)
    }
}

/// Outcome of [`evolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub best: Individual,
    pub best_fitness: f64,
    pub converged: bool,
    pub generations: usize,
    pub escalations: usize,
    pub final_length: usize,
    /// `(generation, best fitness so far)`, one entry per generation.
    pub fitness_trace: Vec<(usize, f64)>,
    pub stats: CircuitStats,
    /// Seconds.
    pub wall_time: f64,
}

/// One-point crossover at `⌊L/2⌋`: each child takes the front half of one
/// parent and the back half of the other.
pub fn crossover(p1: &Individual, p2: &Individual) -> Result<(Individual, Individual)> {
    if p1.len() != p2.len() {
        return Err(Error::LengthMismatch(p1.len(), p2.len()));
    }
    if p1.n_qubits() != p2.n_qubits() {
        return Err(Error::DimensionMismatch { left: p1.n_qubits(), right: p2.n_qubits() });
    }
    let k = p1.len() / 2;
    let splice = |front: &Individual, back: &Individual| {
        let genes = front.genes()[..k].iter().chain(&back.genes()[k..]).copied().collect();
        Individual::from_parts(front.n_qubits(), genes)
    };
    Ok((splice(p1, p2), splice(p2, p1)))
}

/// Replaces each gene by a fresh random gene with probability `rate`.
pub fn mutate<R: Rng + ?Sized>(ind: &Individual, rate: f64, rng: &mut R) -> Individual {
    let mut out = ind.clone();
    mutate_in_place(&mut out, rate, rng);
    out
}

/// Returns the number of genes replaced. The fitness cache is cleared only
/// when at least one gene changed.
fn mutate_in_place<R: Rng + ?Sized>(ind: &mut Individual, rate: f64, rng: &mut R) -> usize {
    let n = ind.n_qubits();
    let mut changed = 0;
    for i in 0..ind.len() {
        if rng.random::<f64>() < rate {
            let gene = random_gene(n, rng).expect("register size already validated");
            ind.genes_mut()[i] = gene;
            changed += 1;
        }
    }
    changed
}

/// Roulette-wheel selection: `count` independent draws, each picking
/// individual `i` with probability `fitnesses[i] / Σ fitnesses`.
pub fn select<R: Rng + ?Sized>(
    population: &[Individual],
    fitnesses: &[f64],
    count: usize,
    rng: &mut R,
) -> Result<Vec<Individual>> {
    Ok(roulette_indices(fitnesses, population.len(), count, rng)?.into_iter().map(|i| population[i].clone()).collect())
}

fn roulette_indices<R: Rng + ?Sized>(fitnesses: &[f64], len: usize, count: usize, rng: &mut R) -> Result<Vec<usize>> {
    if fitnesses.len() != len {
        return Err(Error::LengthMismatch(len, fitnesses.len()));
    }
    if fitnesses.iter().any(|f| !f.is_finite() || *f < 0.0) {
        return Err(Error::InvalidConfig("fitness values must be finite and non-negative".into()));
    }
    let mut acc = 0.0;
    let cumulative: Vec<f64> = fitnesses
        .iter()
        .map(|f| {
            acc += f;
            acc
        })
        .collect();
    if acc <= 0.0 {
        return Err(Error::DegeneratePopulation);
    }
    Ok((0..count)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            cumulative.partition_point(|&c| c <= u).min(len - 1)
        })
        .collect())
}

fn fitness_of(ind: &Individual) -> f64 {
    ind.fitness().expect("population members are evaluated")
}

fn best_index(pop: &[Individual]) -> usize {
    // first maximum, so ties resolve deterministically
    let mut best = 0;
    for (i, ind) in pop.iter().enumerate() {
        if fitness_of(ind) > fitness_of(&pop[best]) {
            best = i;
        }
    }
    best
}

/// Optimizes (in parallel) every individual whose fitness cache is empty.
fn refresh(pop: &mut [Individual], target: &StateVector, settings: &OptimizerSettings) -> Result<()> {
    pop.par_iter_mut().filter(|ind| ind.fitness().is_none()).try_for_each(|ind| {
        *ind = optimize_angles(ind, target, settings)?;
        Ok(())
    })
}

fn fresh_population(
    target: &StateVector,
    config: &EvolutionConfig,
    length: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Individual>> {
    let n = target.n_qubits();
    let mut pop = (0..config.population_size).map(|_| random_individual(n, length, rng)).collect::<Result<Vec<_>>>()?;
    refresh(&mut pop, target, &config.optimizer)?;
    Ok(pop)
}

/// Runs the genetic search until the best fidelity reaches
/// `config.fidelity_goal` or the generation cap is hit. Hitting the cap is
/// not an error; the report comes back with `converged == false`.
pub fn evolve(target: &StateVector, config: &EvolutionConfig) -> Result<RunReport> {
    config.validate()?;
    let started = Instant::now();
    let n = target.n_qubits();
    let mut rng = substream(config.seed, 0);

    let mut length = config.initial_length_for(n);
    let mut generations = 0usize;
    let mut escalations = 0usize;
    let mut trace = Vec::new();
    let mut global: Option<Individual> = None;

    let record = |global: &mut Option<Individual>, candidate: &Individual| {
        if global.as_ref().is_none_or(|g| fitness_of(candidate) > fitness_of(g)) {
            *global = Some(candidate.clone());
        }
    };

    'levels: loop {
        let mut pop = fresh_population(target, config, length, &mut rng)?;
        let mut level_best = fitness_of(&pop[best_index(&pop)]);
        record(&mut global, &pop[best_index(&pop)]);
        let global_fitness = |g: &Option<Individual>| g.as_ref().map_or(0.0, fitness_of);
        if trace.is_empty() {
            trace.push((0, global_fitness(&global)));
        }
        log::debug!("length {length}: initial best {level_best:.6}");

        let mut stall = 0;
        while global_fitness(&global) < config.fidelity_goal {
            if generations >= config.max_total_generations {
                break 'levels;
            }
            if stall >= config.maxiter {
                length += 1;
                escalations += 1;
                log::debug!("stalled at {level_best:.6}; growing genome to {length}");
                continue 'levels;
            }
            generations += 1;

            match step(&mut pop, target, config, &mut rng) {
                Ok(()) => {}
                Err(Error::DegeneratePopulation) => {
                    pop = fresh_population(target, config, length, &mut rng)?;
                }
                Err(e) => return Err(e),
            }

            let best = best_index(&pop);
            let f = fitness_of(&pop[best]);
            if f > level_best + IMPROVEMENT_EPSILON {
                level_best = f;
                stall = 0;
            } else {
                stall += 1;
            }
            record(&mut global, &pop[best]);
            trace.push((generations, global_fitness(&global)));
        }
        break;
    }

    let best = global.expect("at least one population was evaluated");
    let best_fitness = sim::fidelity(target, &best.state()?)?;
    Ok(RunReport {
        stats: best.stats(),
        final_length: length,
        converged: best_fitness >= config.fidelity_goal,
        best,
        best_fitness,
        generations,
        escalations,
        fitness_trace: trace,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

/// One generation: crossover, mutation, angle optimization, selection.
fn step(pop: &mut Vec<Individual>, target: &StateVector, config: &EvolutionConfig, rng: &mut ChaCha8Rng) -> Result<()> {
    let size = pop.len();
    let elite = pop[best_index(pop)].clone();

    let mut order: Vec<usize> = (0..size).collect();
    order.shuffle(rng);
    let mut pool = Vec::with_capacity(2 * size);
    pool.append(pop);
    for pair in order.chunks_exact(2) {
        let (a, b) = crossover(&pool[pair[0]], &pool[pair[1]])?;
        pool.push(a);
        pool.push(b);
    }
    for ind in pool.iter_mut() {
        mutate_in_place(ind, config.mutation_rate, rng);
    }
    refresh(&mut pool, target, &config.optimizer)?;

    let fitnesses: Vec<f64> = pool.iter().map(fitness_of).collect();
    let picks = roulette_indices(&fitnesses, pool.len(), size - 1, rng)?;
    pop.push(elite);
    pop.extend(picks.into_iter().map(|i| pool[i].clone()));
    Ok(())
}
