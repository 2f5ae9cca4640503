//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Every tolerance is a named constant.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use gasp_core::{
    apply_gate, exact_synthesize, fidelity, fitness_gradient, gaussian_state, mutate, random_individual, run_benchmark,
    run_circuit, select, w_state, Aggregate, BenchResult, BenchRow, EvolutionConfig, Family, GaussianSpec, Gene,
    Individual, Method, NoiseModel, StateVector,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ORACLE_TOL: f64 = 1e-9;
const ORACLE_LIMIT_S: f64 = 10.0;
const FD_STEP: f64 = 1e-5;
const GRADIENT_TOL: f64 = 1e-6;
const GRADIENT_LIMIT_S: f64 = 30.0;
const BASELINE_FIDELITY_TOL: f64 = 1e-9;
const BASELINE_LIMIT_S: f64 = 30.0;
const FIDELITY_GOAL: f64 = 0.99;
const CONVERGED_SHARE: f64 = 0.8;
const GA_LIMIT_S: f64 = 30.0 * 60.0;
const ROBUST_SHARE: f64 = 0.8;
const SHOTS: usize = 16384;
const SIGMAS: f64 = 5.0;

/// Desk-scale GA settings: small population, fast escalation.
fn desk_config() -> EvolutionConfig {
    EvolutionConfig {
        population_size: 20,
        maxiter: 10,
        fidelity_goal: FIDELITY_GOAL,
        max_total_generations: 5000,
        seed: 2024,
        ..EvolutionConfig::default()
    }
}

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("simulator matches Kronecker oracle", criterion_1),
        ("parameter-shift gradient matches finite differences", criterion_2),
        ("baseline exactness and CNOT counts", criterion_3),
        ("GASP convergence, n = 2..5", criterion_4),
        ("GASP compression vs baseline, n = 5..6", criterion_5),
        ("noise-robustness ordering, n ≥ 4", criterion_6),
        ("CLI determinism", criterion_7),
        ("GA operator statistics", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = check();
        failed += usize::from(!outcome.pass);
        println!("{} [{}] {name}: {}", if outcome.pass { "PASS" } else { "FAIL" }, i + 1, outcome.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- oracle

type Matrix = Vec<Vec<Complex64>>;

fn identity(dim: usize) -> Matrix {
    (0..dim).map(|r| (0..dim).map(|c| Complex64::from(f64::from(u8::from(r == c)))).collect()).collect()
}

fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![Complex64::default(); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn add(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect()).collect()
}

fn mat_vec(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// `factors[q]` acts on qubit q; qubit 0 is the rightmost Kronecker factor.
fn embed(factors: &[Matrix]) -> Matrix {
    factors.iter().rev().fold(identity(1), |acc, f| kron(&acc, f))
}

fn gate_matrix(gene: &Gene, n: usize) -> Matrix {
    let c = Complex64::new;
    let i2 = identity(2);
    match *gene {
        Gene::Rotation { axis, target, angle } => {
            let (co, si) = ((angle / 2.0).cos(), (angle / 2.0).sin());
            let u = match axis {
                gasp_core::Axis::X => vec![vec![c(co, 0.0), c(0.0, -si)], vec![c(0.0, -si), c(co, 0.0)]],
                gasp_core::Axis::Y => vec![vec![c(co, 0.0), c(-si, 0.0)], vec![c(si, 0.0), c(co, 0.0)]],
                gasp_core::Axis::Z => vec![vec![c(co, -si), c(0.0, 0.0)], vec![c(0.0, 0.0), c(co, si)]],
            };
            embed(&(0..n).map(|q| if q == target { u.clone() } else { i2.clone() }).collect::<Vec<_>>())
        }
        Gene::Cnot { control, target } => {
            let p0 = vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]];
            let p1 = vec![vec![c(0.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]];
            let x = vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]];
            let idle = embed(&(0..n).map(|q| if q == control { p0.clone() } else { i2.clone() }).collect::<Vec<_>>());
            let flip = embed(
                &(0..n)
                    .map(|q| match q {
                        _ if q == control => p1.clone(),
                        _ if q == target => x.clone(),
                        _ => i2.clone(),
                    })
                    .collect::<Vec<_>>(),
            );
            add(&idle, &flip)
        }
    }
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(1..=3);
        let len = rng.random_range(0..=20);
        let ind = random_individual(n, len, &mut rng).unwrap();
        let got = run_circuit(ind.genes(), n).unwrap();
        let mut want = vec![Complex64::default(); 1 << n];
        want[0] = Complex64::from(1.0);
        for gene in ind.genes() {
            want = mat_vec(&gate_matrix(gene, n), &want);
        }
        for (a, b) in got.amplitudes().iter().zip(&want) {
            worst = worst.max((a - b).norm());
        }
        // same circuit from a random start, one apply_gate at a time
        let start = random_state(n, &mut rng);
        let mut got = start.clone();
        let mut want = start.amplitudes().to_vec();
        for gene in ind.genes() {
            got = apply_gate(&got, gene).unwrap();
            want = mat_vec(&gate_matrix(gene, n), &want);
        }
        for (a, b) in got.amplitudes().iter().zip(&want) {
            worst = worst.max((a - b).norm());
        }
    }
    let secs = started.elapsed().as_secs_f64();
    Outcome {
        pass: worst <= ORACLE_TOL && secs < ORACLE_LIMIT_S,
        detail: format!("200 circuits from |0…0⟩ and from a random state, max |Δ| = {worst:.2e} (tol {ORACLE_TOL:e}), {secs:.2} s (limit {ORACLE_LIMIT_S} s)"),
    }
}

// -------------------------------------------------------------- gradient

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let amps = (0..1 << n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    StateVector::normalized(amps).unwrap()
}

fn criterion_2() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < 100 {
        let n = rng.random_range(1..=4);
        let len = rng.random_range(1..=15);
        let ind = random_individual(n, len, &mut rng).unwrap();
        if ind.rotation_count() == 0 {
            continue;
        }
        let target = random_state(n, &mut rng);
        let grad = fitness_gradient(&ind, &target).unwrap();
        let angles = ind.angles();
        let f = |theta: &[f64]| fidelity(&target, &ind.with_angles(theta).state().unwrap()).unwrap();
        for (j, g) in grad.iter().enumerate() {
            let mut plus = angles.clone();
            plus[j] += FD_STEP;
            let mut minus = angles.clone();
            minus[j] -= FD_STEP;
            let fd = (f(&plus) - f(&minus)) / (2.0 * FD_STEP);
            worst = worst.max((g - fd).abs());
        }
        checked += 1;
    }
    let secs = started.elapsed().as_secs_f64();
    Outcome {
        pass: worst <= GRADIENT_TOL && secs < GRADIENT_LIMIT_S,
        detail: format!(
            "100 individuals, h = {FD_STEP:e}, max |Δ| = {worst:.2e} (tol {GRADIENT_TOL:e}), {secs:.2} s (limit {GRADIENT_LIMIT_S} s)"
        ),
    }
}

// -------------------------------------------------------------- baseline

fn criterion_3() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let target = random_state(1 + i % 6, &mut rng);
        let circuit = exact_synthesize(&target);
        worst = worst.max(1.0 - fidelity(&target, &circuit.state().unwrap()).unwrap());
    }
    let mut counts = Vec::new();
    let mut counts_ok = true;
    for n in 2..=6usize {
        let gaussian = exact_synthesize(&gaussian_state(&GaussianSpec::centered(n)).unwrap()).stats().cnot_count;
        let w = exact_synthesize(&w_state(n).unwrap()).stats().cnot_count;
        let weights: Vec<f64> = (0..1 << n).map(|_| rng.random_range(0.0..1.0)).collect();
        let positive = exact_synthesize(&StateVector::from_real(&weights).unwrap()).stats().cnot_count;
        let expected = (1 << n) - 2;
        let bound = (1 << (n + 1)) - 2 * n;
        counts_ok &= [gaussian, w, positive].iter().all(|&c| c == expected && c <= bound);
        counts.push(gaussian);
    }
    let secs = started.elapsed().as_secs_f64();
    Outcome {
        pass: worst <= BASELINE_FIDELITY_TOL && counts_ok && counts == [2, 6, 14, 30, 62] && secs < BASELINE_LIMIT_S,
        detail: format!(
            "100 targets, max 1 − F = {worst:.2e} (tol {BASELINE_FIDELITY_TOL:e}); CNOTs n=2..6 {counts:?} (want [2, 6, 14, 30, 62], ≤ 2^(n+1) − 2n); {secs:.2} s (limit {BASELINE_LIMIT_S} s)"
        ),
    }
}

// ------------------------------------------------------------- benchmark

struct Sweep {
    results: Vec<BenchResult>,
    secs: f64,
}

fn sweep() -> &'static Sweep {
    static SWEEP: std::sync::OnceLock<Sweep> = std::sync::OnceLock::new();
    SWEEP.get_or_init(|| {
        let started = Instant::now();
        let results = [Family::W, Family::Gaussian]
            .into_iter()
            .map(|family| run_benchmark(family, 2..=6, &desk_config(), &NoiseModel::default(), SHOTS, 3).unwrap())
            .collect();
        Sweep { results, secs: started.elapsed().as_secs_f64() }
    })
}

fn gasp_rows(r: &BenchResult) -> impl Iterator<Item = &BenchRow> {
    r.rows.iter().filter(|row| row.method == Method::Gasp)
}

fn criterion_4() -> Outcome {
    let sweep = sweep();
    let mut total = 0;
    let mut converged = 0;
    let mut per_family = Vec::new();
    for r in &sweep.results {
        let rows: Vec<&BenchRow> = gasp_rows(r).filter(|row| (2..=5).contains(&row.n)).collect();
        // a converged row must also meet the goal when re-measured
        let ok = rows.iter().filter(|row| row.converged && row.ideal_fidelity >= FIDELITY_GOAL).count();
        per_family.push(format!("{} {ok}/{}", r.family, rows.len()));
        total += rows.len();
        converged += ok;
    }
    let share = converged as f64 / total as f64;
    Outcome {
        pass: share >= CONVERGED_SHARE && sweep.secs <= GA_LIMIT_S,
        detail: format!(
            "{converged}/{total} runs reached F ≥ {FIDELITY_GOAL} ({}; need ≥ {:.0}%); sweep incl. n = 6 took {:.0} s (limit {GA_LIMIT_S} s)",
            per_family.join(", "),
            CONVERGED_SHARE * 100.0,
            sweep.secs
        ),
    }
}

fn criterion_5() -> Outcome {
    let mut compared = 0;
    let mut violations = Vec::new();
    for r in &sweep().results {
        let baseline: BTreeMap<(usize, usize), &BenchRow> =
            r.rows.iter().filter(|row| row.method == Method::Baseline).map(|row| ((row.n, row.repeat), row)).collect();
        for row in gasp_rows(r).filter(|row| row.converged && row.n >= 5) {
            let base = baseline[&(row.n, row.repeat)];
            compared += 1;
            if !(row.total_gates < base.total_gates && row.cnot_count < base.cnot_count) {
                violations.push(format!(
                    "{} n={} r={}: {}/{} vs {}/{}",
                    r.family, row.n, row.repeat, row.total_gates, row.cnot_count, base.total_gates, base.cnot_count
                ));
            }
        }
    }
    let summary: Vec<String> = sweep()
        .results
        .iter()
        .flat_map(|r| {
            gasp_rows(r)
                .filter(|row| row.n >= 5)
                .map(move |row| format!("{}{}:{}/{}", r.family, row.n, row.total_gates, row.cnot_count))
        })
        .collect();
    Outcome {
        pass: compared > 0 && violations.is_empty(),
        detail: format!(
            "{compared} converged runs, strict < on gates and CNOTs vs baseline 61/30 (n=5), 125/62 (n=6); gates/CNOTs {}{}",
            summary.join(" "),
            if violations.is_empty() { String::new() } else { format!("; violations: {}", violations.join(", ")) }
        ),
    }
}

fn criterion_6() -> Outcome {
    let mut wins = 0;
    let mut cells = Vec::new();
    for r in &sweep().results {
        let aggregates = gasp_core::aggregate(&r.rows);
        let mean = |n: usize, method: Method| -> &Aggregate {
            aggregates.iter().find(|a| a.n == n && a.method == method).unwrap()
        };
        for n in 4..=6 {
            let (g, b) = (mean(n, Method::Gasp), mean(n, Method::Baseline));
            assert!(g.runs >= 3 && b.runs >= 3);
            let win = g.noisy_classical_fidelity.mean > b.noisy_classical_fidelity.mean;
            wins += usize::from(win);
            cells.push(format!(
                "{}{n} {:.4} vs {:.4}",
                r.family, g.noisy_classical_fidelity.mean, b.noisy_classical_fidelity.mean
            ));
        }
    }
    let share = wins as f64 / cells.len() as f64;
    Outcome {
        pass: share >= ROBUST_SHARE,
        detail: format!(
            "GASP ahead in {wins}/{} (family, n) cells (need ≥ {:.0}%; {SHOTS} shots, p1 0.001, p2 0.01, readout 0.02): {}",
            cells.len(),
            ROBUST_SHARE * 100.0,
            cells.join(", ")
        ),
    }
}

// ----------------------------------------------------------- determinism

fn gasp(dir: &Path, args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_gasp"))
        .current_dir(dir)
        .args(["--workers", "1", "--no-timing"])
        .args(args)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let key = path.strip_prefix(dir).unwrap().display().to_string();
                files.insert(key, fs::read(&path).unwrap());
            }
        }
    }
    files
}

fn criterion_7() -> Outcome {
    let runs: Vec<(bool, BTreeMap<String, Vec<u8>>)> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let d = dir.path();
            let ok = gasp(
                d,
                &["synth", "--target", "w", "--qubits", "3", "--seed", "5", "--pop", "30", "--out", "synth.qasm"],
            ) && gasp(d, &["baseline", "--target", "gaussian", "--qubits", "4", "--out", "baseline.qasm"])
                && gasp(d, &["sample", "--circuit", "baseline.qasm", "--seed", "9", "--out", "counts.json"])
                && gasp(
                    d,
                    &[
                        "bench",
                        "--family",
                        "w",
                        "--min-qubits",
                        "2",
                        "--max-qubits",
                        "3",
                        "--repeats",
                        "2",
                        "--pop",
                        "30",
                        "--shots",
                        "4096",
                        "--seed",
                        "3",
                        "--out",
                        "bench",
                    ],
                );
            (ok, snapshot(d))
        })
        .collect();
    let all_ok = runs.iter().all(|(ok, _)| *ok);
    let (a, b) = (&runs[0].1, &runs[1].1);
    let differing: Vec<&String> = a.keys().filter(|k| a.get(*k) != b.get(*k)).collect();
    Outcome {
        pass: all_ok && a.len() == b.len() && a.len() >= 10 && differing.is_empty(),
        detail: format!(
            "synth, baseline, sample, bench run twice with --workers 1: {} files compared, {} differ{}",
            a.len(),
            differing.len(),
            if all_ok { "" } else { "; a command failed" }
        ),
    }
}

// ------------------------------------------------------------ operators

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let draws = 100_000usize;
    let fitnesses = [0.05, 0.1, 0.15, 0.2, 0.5];
    let population: Vec<Individual> =
        (0..fitnesses.len()).map(|i| Individual::new(1, vec![Gene::rx(0, 0.1 * (i + 1) as f64)]).unwrap()).collect();
    let picked = select(&population, &fitnesses, draws, &mut rng).unwrap();
    let total: f64 = fitnesses.iter().sum();
    let mut roulette_z = 0.0f64;
    for (ind, &f) in population.iter().zip(&fitnesses) {
        let p = f / total;
        let count = picked.iter().filter(|x| *x == ind).count() as f64;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        roulette_z = roulette_z.max((count - draws as f64 * p).abs() / sigma);
    }

    let (trials, length, rate) = (10_000usize, 100usize, 0.05);
    // all-rotation parents: a resampled gene differs from the original almost surely
    let parent = Individual::new(3, (0..length).map(|i| Gene::ry(i % 3, 1.0)).collect()).unwrap();
    let mut flipped = 0usize;
    for _ in 0..trials {
        let child = mutate(&parent, rate, &mut rng);
        flipped += child.genes().iter().zip(parent.genes()).filter(|(a, b)| a != b).count();
    }
    let mean = flipped as f64 / trials as f64;
    let expected = rate * length as f64;
    let sigma_mean = (length as f64 * rate * (1.0 - rate) / trials as f64).sqrt();
    let mutation_z = (mean - expected).abs() / sigma_mean;

    Outcome {
        pass: roulette_z <= SIGMAS && mutation_z <= SIGMAS,
        detail: format!(
            "roulette {draws} draws, worst {roulette_z:.2}σ; mutation {trials} trials mean {mean:.4} genes vs {expected} ({mutation_z:.2}σ); limit {SIGMAS}σ"
        ),
    }
}
