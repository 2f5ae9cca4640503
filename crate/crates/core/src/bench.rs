//! Distribution metrics and the GASP-vs-baseline benchmark harness.

use std::fmt;
use std::io::Write;
use std::ops::RangeInclusive;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::exact_synthesize;
use crate::error::{Error, Result};
use crate::evolution::{evolve, EvolutionConfig};
use crate::genome::Individual;
use crate::noise::{sample_counts_seeded, Counts, NoiseModel};
use crate::rng::derive_seed;
use crate::sim::{self, StateVector};
use crate::targets::{gaussian_state, w_state, GaussianSpec};

/// Bhattacharyya fidelity `(Σ_x √(q̂_x p_x))²` between the empirical
/// distribution of `counts` and `ideal`.
pub fn classical_fidelity(counts: &Counts, ideal: &[f64]) -> Result<f64> {
    let shots = total_shots(counts)?;
    let overlap: f64 =
        counts.iter().filter(|(&x, _)| x < ideal.len()).map(|(&x, &c)| (c as f64 / shots * ideal[x]).sqrt()).sum();
    Ok((overlap * overlap).min(1.0))
}

/// Total variation distance `½ Σ_x |q̂_x − p_x|`.
pub fn total_variation(counts: &Counts, ideal: &[f64]) -> Result<f64> {
    let shots = total_shots(counts)?;
    let mut distance: f64 =
        ideal.iter().enumerate().map(|(x, &p)| (counts.get(&x).copied().unwrap_or(0) as f64 / shots - p).abs()).sum();
    distance += counts.range(ideal.len()..).map(|(_, &c)| c as f64 / shots).sum::<f64>();
    Ok(0.5 * distance)
}

fn total_shots(counts: &Counts) -> Result<f64> {
    let shots: u64 = counts.values().sum();
    if shots == 0 {
        return Err(Error::EmptyCounts);
    }
    Ok(shots as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gaussian,
    W,
}

impl Family {
    pub fn target(self, n_qubits: usize) -> Result<StateVector> {
        match self {
            Family::Gaussian => gaussian_state(&GaussianSpec::centered(n_qubits)),
            Family::W => w_state(n_qubits),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Gaussian => "gaussian",
            Family::W => "w",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Family::Gaussian),
            "w" => Ok(Family::W),
            other => Err(Error::InvalidConfig(format!("unknown family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Gasp,
    Baseline,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Gasp => "gasp",
            Method::Baseline => "baseline",
        })
    }
}

/// One (n, method, repeat) measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub method: Method,
    pub total_gates: usize,
    pub cnot_count: usize,
    pub depth: usize,
    pub ideal_fidelity: f64,
    pub noisy_classical_fidelity: f64,
    pub generations: usize,
    pub wall_time: f64,
    pub repeat: usize,
    pub converged: bool,
    pub total_variation: f64,
}

/// Column order of the benchmark CSV.
pub const CSV_COLUMNS: [&str; 9] = [
    "n",
    "method",
    "total_gates",
    "cnot_count",
    "depth",
    "ideal_fidelity",
    "noisy_classical_fidelity",
    "generations",
    "wall_time",
];

/// Sampled histogram behind one row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub n: usize,
    pub method: Method,
    pub repeat: usize,
    pub counts: Counts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub family: Family,
    pub rows: Vec<BenchRow>,
    pub histograms: Vec<Histogram>,
    /// Circuits per row, in row order.
    #[serde(skip)]
    pub circuits: Vec<Individual>,
}

/// Runs GASP and the exact baseline for each `n` and repeat, sampling each
/// circuit under `noise`. Rows come out ordered by `(n, repeat, method)`.
///
/// Every row gets its own seed derived from `(config.seed, family, n,
/// repeat)`, so rows can run in parallel without affecting results.
pub fn run_benchmark(
    family: Family,
    n_range: RangeInclusive<usize>,
    config: &EvolutionConfig,
    noise: &NoiseModel,
    shots: usize,
    repeats: usize,
) -> Result<BenchResult> {
    config.validate()?;
    noise.validate()?;
    if shots == 0 || repeats == 0 {
        return Err(Error::InvalidConfig("shots and repeats must be ≥ 1".into()));
    }
    let jobs: Vec<(usize, usize)> = n_range.flat_map(|n| (0..repeats).map(move |r| (n, r))).collect();
    let results = jobs
        .par_iter()
        .map(|&(n, repeat)| run_job(family, n, repeat, config, noise, shots))
        .collect::<Result<Vec<_>>>()?;

    let mut out = BenchResult { family, rows: Vec::new(), histograms: Vec::new(), circuits: Vec::new() };
    for job in results {
        for (row, hist, circuit) in job {
            out.rows.push(row);
            out.histograms.push(hist);
            out.circuits.push(circuit);
        }
    }
    Ok(out)
}

type JobOutput = Vec<(BenchRow, Histogram, Individual)>;

fn run_job(
    family: Family,
    n: usize,
    repeat: usize,
    config: &EvolutionConfig,
    noise: &NoiseModel,
    shots: usize,
) -> Result<JobOutput> {
    let target = family.target(n)?;
    let ideal = sim::probabilities(&target);
    let family_tag = family as u64;
    let row_seed = derive_seed(&[config.seed, family_tag, n as u64, repeat as u64]);

    let gasp_config = EvolutionConfig { seed: row_seed, ..config.clone() };
    let report = evolve(&target, &gasp_config)?;
    if !report.converged {
        log::warn!("{family} n={n} repeat={repeat}: GASP stopped at fidelity {:.4}", report.best_fitness);
    }

    let started = Instant::now();
    let baseline = exact_synthesize(&target);
    let baseline_time = started.elapsed().as_secs_f64();
    let baseline_fidelity = sim::fidelity(&target, &baseline.state()?)?;

    let mut out = Vec::with_capacity(2);
    for (method, circuit, ideal_fidelity, generations, wall_time, converged) in [
        (Method::Gasp, report.best, report.best_fitness, report.generations, report.wall_time, report.converged),
        (Method::Baseline, baseline, baseline_fidelity, 0, baseline_time, true),
    ] {
        let sample_seed = derive_seed(&[row_seed, method as u64]);
        let counts = sample_counts_seeded(&circuit, noise, shots, sample_seed)?;
        let stats = circuit.stats();
        let row = BenchRow {
            n,
            method,
            total_gates: stats.total_gates,
            cnot_count: stats.cnot_count,
            depth: stats.depth,
            ideal_fidelity,
            noisy_classical_fidelity: classical_fidelity(&counts, &ideal)?,
            generations,
            wall_time,
            repeat,
            converged,
            total_variation: total_variation(&counts, &ideal)?,
        };
        out.push((row, Histogram { n, method, repeat, counts }, circuit));
    }
    Ok(out)
}

/// Mean and standard error of one column over a group of rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanErr {
    pub mean: f64,
    pub stderr: f64,
}

impl MeanErr {
    pub fn of(values: &[f64]) -> Self {
        let k = values.len() as f64;
        if values.is_empty() {
            return Self { mean: f64::NAN, stderr: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / k;
        if values.len() < 2 {
            return Self { mean, stderr: 0.0 };
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
        Self { mean, stderr: (var / k).sqrt() }
    }
}

/// Per-(n, method) summary over repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n: usize,
    pub method: Method,
    pub runs: usize,
    pub converged_runs: usize,
    pub total_gates: MeanErr,
    pub cnot_count: MeanErr,
    pub depth: MeanErr,
    pub ideal_fidelity: MeanErr,
    pub noisy_classical_fidelity: MeanErr,
}

pub fn aggregate(rows: &[BenchRow]) -> Vec<Aggregate> {
    let mut keys: Vec<(usize, Method)> = rows.iter().map(|r| (r.n, r.method)).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(n, method)| {
            let group: Vec<&BenchRow> = rows.iter().filter(|r| r.n == n && r.method == method).collect();
            let col = |f: fn(&BenchRow) -> f64| MeanErr::of(&group.iter().map(|r| f(r)).collect::<Vec<_>>());
            Aggregate {
                n,
                method,
                runs: group.len(),
                converged_runs: group.iter().filter(|r| r.converged).count(),
                total_gates: col(|r| r.total_gates as f64),
                cnot_count: col(|r| r.cnot_count as f64),
                depth: col(|r| r.depth as f64),
                ideal_fidelity: col(|r| r.ideal_fidelity),
                noisy_classical_fidelity: col(|r| r.noisy_classical_fidelity),
            }
        })
        .collect()
}

/// Writes `rows` as CSV with exactly the [`CSV_COLUMNS`] header.
pub fn write_csv<W: Write>(rows: &[BenchRow], writer: W) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidConfig(format!("CSV output failed: {e}"));
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.method.to_string(),
            r.total_gates.to_string(),
            r.cnot_count.to_string(),
            r.depth.to_string(),
            r.ideal_fidelity.to_string(),
            r.noisy_classical_fidelity.to_string(),
            r.generations.to_string(),
            r.wall_time.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidConfig(format!("CSV output failed: {e}")))?;
    Ok(())
}
