//! Stochastic Pauli gate noise and finite-shot measurement.
//!
//! Each shot is a Monte-Carlo trajectory: after every single-qubit gate an
//! error occurs with probability `p1`, and after a CNOT each of its two
//! qubits independently errs with probability `p2`. An error is a uniformly
//! random X, Y or Z. Readout flips each measured bit with probability
//! `readout_flip`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genome::{Axis, Gene, Individual};
use crate::rng::substream;
use crate::sim;

/// Histogram of measured basis indices.
pub type Counts = BTreeMap<usize, u64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Error probability after each single-qubit gate.
    pub p1: f64,
    /// Error probability per qubit after each CNOT.
    pub p2: f64,
    /// Bit-flip probability per measured qubit.
    pub readout_flip: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { p1: 0.001, p2: 0.01, readout_flip: 0.02 }
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self { p1: 0.0, p2: 0.0, readout_flip: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2), ("readout_flip", self.readout_flip)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} = {p} is not a probability")));
            }
        }
        Ok(())
    }
}

/// Shots per independently seeded shard in [`sample_counts_seeded`].
pub const SHARD_SHOTS: usize = 1024;

/// Ideal prefix states are cached only below this many amplitudes in total.
const PREFIX_CACHE_LIMIT: usize = 1 << 22;

struct Sampler<'a> {
    n_qubits: usize,
    genes: &'a [Gene],
    noise: NoiseModel,
    /// `prefix[j]` is the ideal state after gate `j`.
    prefix: Option<Vec<Vec<Complex64>>>,
    ideal_cdf: Vec<f64>,
}

impl<'a> Sampler<'a> {
    fn new(ind: &'a Individual, noise: NoiseModel) -> Self {
        let n_qubits = ind.n_qubits();
        let genes = ind.genes();
        let cache = genes.len().saturating_mul(1 << n_qubits) <= PREFIX_CACHE_LIMIT;
        let mut psi = sim::zero_amplitudes(n_qubits);
        let mut prefix = cache.then(|| Vec::with_capacity(genes.len()));
        for gene in genes {
            sim::apply_gene_in_place(&mut psi, gene);
            if let Some(p) = prefix.as_mut() {
                p.push(psi.clone());
            }
        }
        Self { n_qubits, genes, noise, prefix, ideal_cdf: cdf(&psi) }
    }

    fn ideal_after(&self, gate: usize) -> Vec<Complex64> {
        if let Some(prefix) = &self.prefix {
            return prefix[gate].clone();
        }
        let mut psi = sim::zero_amplitudes(self.n_qubits);
        for gene in &self.genes[..=gate] {
            sim::apply_gene_in_place(&mut psi, gene);
        }
        psi
    }

    fn shot<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let NoiseModel { p1, p2, readout_flip } = self.noise;
        let mut state: Option<Vec<Complex64>> = None;
        for (j, gene) in self.genes.iter().enumerate() {
            if let Some(psi) = state.as_mut() {
                sim::apply_gene_in_place(psi, gene);
            }
            let (p, qubits): (f64, [Option<usize>; 2]) = match *gene {
                Gene::Rotation { target, .. } => (p1, [Some(target), None]),
                Gene::Cnot { control, target } => (p2, [Some(control), Some(target)]),
            };
            if p == 0.0 {
                continue;
            }
            for q in qubits.into_iter().flatten() {
                if rng.random::<f64>() < p {
                    let axis = [Axis::X, Axis::Y, Axis::Z][rng.random_range(0..3)];
                    let psi = state.get_or_insert_with(|| self.ideal_after(j));
                    sim::apply_pauli(psi, axis, q);
                }
            }
        }
        let mut outcome = match &state {
            None => sample_cdf(&self.ideal_cdf, rng),
            Some(psi) => sample_cdf(&cdf(psi), rng),
        };
        if readout_flip > 0.0 {
            for q in 0..self.n_qubits {
                if rng.random::<f64>() < readout_flip {
                    outcome ^= 1 << q;
                }
            }
        }
        outcome
    }
}

fn cdf(psi: &[Complex64]) -> Vec<f64> {
    let mut acc = 0.0;
    psi.iter()
        .map(|a| {
            acc += a.norm_sqr();
            acc
        })
        .collect()
}

fn sample_cdf<R: Rng + ?Sized>(cdf: &[f64], rng: &mut R) -> usize {
    let u = rng.random::<f64>() * cdf[cdf.len() - 1];
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// Runs `shots` noisy trajectories of `ind` and histograms the outcomes.
pub fn sample_counts<R: Rng + ?Sized>(
    ind: &Individual,
    noise: &NoiseModel,
    shots: usize,
    rng: &mut R,
) -> Result<Counts> {
    noise.validate()?;
    if shots == 0 {
        return Err(Error::InvalidConfig("shots must be ≥ 1".into()));
    }
    let sampler = Sampler::new(ind, *noise);
    let mut counts = Counts::new();
    for _ in 0..shots {
        *counts.entry(sampler.shot(rng)).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Like [`sample_counts`], but shards the shots over rayon workers. Shard `i`
/// draws from stream `i` of `seed`, so the histogram is independent of the
/// number of workers.
pub fn sample_counts_seeded(ind: &Individual, noise: &NoiseModel, shots: usize, seed: u64) -> Result<Counts> {
    noise.validate()?;
    if shots == 0 {
        return Err(Error::InvalidConfig("shots must be ≥ 1".into()));
    }
    let sampler = Sampler::new(ind, *noise);
    let shards = shots.div_ceil(SHARD_SHOTS);
    let partial: Vec<Counts> = (0..shards)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let n = SHARD_SHOTS.min(shots - i * SHARD_SHOTS);
            let mut counts = Counts::new();
            for _ in 0..n {
                *counts.entry(sampler.shot(&mut rng)).or_insert(0) += 1;
            }
            counts
        })
        .collect();
    let mut counts = Counts::new();
    for shard in partial {
        for (k, v) in shard {
            *counts.entry(k).or_insert(0) += v;
        }
    }
    Ok(counts)
}
