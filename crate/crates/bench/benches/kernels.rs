use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use gasp_bench::{circuit, target};
use gasp_core::{
    evolve, exact_synthesize, fitness_gradient, optimize_angles, run_circuit, sample_counts_seeded, w_state,
    EvolutionConfig, NoiseModel, OptimizerSettings,
};

fn simulate(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_circuit");
    for n in [4, 8, 12] {
        let ind = circuit(n, 50, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &ind, |b, ind| {
            b.iter(|| run_circuit(black_box(ind.genes()), n).unwrap())
        });
    }
    group.finish();
}

fn gradient(c: &mut Criterion) {
    let mut group = c.benchmark_group("fitness_gradient");
    for n in [4, 6, 8] {
        let ind = circuit(n, 50, 2);
        let t = target(n, 3);
        group.bench_with_input(BenchmarkId::from_parameter(n), &(ind, t), |b, (ind, t)| {
            b.iter(|| fitness_gradient(black_box(ind), t).unwrap())
        });
    }
    group.finish();
}

fn optimize(c: &mut Criterion) {
    // the 6-qubit, 50-gene case sets the optimizer's default evaluation budget
    let ind = circuit(6, 50, 4);
    let t = w_state(6).unwrap();
    let settings = OptimizerSettings::default();
    c.bench_function("optimize_angles/6q_50g", |b| b.iter(|| optimize_angles(black_box(&ind), &t, &settings).unwrap()));
}

fn sample(c: &mut Criterion) {
    let ind = exact_synthesize(&w_state(6).unwrap());
    let noise = NoiseModel::default();
    c.bench_function("sample_counts/w6_baseline_16384", |b| {
        b.iter(|| sample_counts_seeded(black_box(&ind), &noise, 16384, 5).unwrap())
    });
}

fn baseline(c: &mut Criterion) {
    let t = target(10, 6);
    c.bench_function("exact_synthesize/10q", |b| b.iter(|| exact_synthesize(black_box(&t))));
}

fn ga(c: &mut Criterion) {
    let t = w_state(3).unwrap();
    let config = EvolutionConfig { population_size: 20, maxiter: 10, ..EvolutionConfig::default() };
    let mut group = c.benchmark_group("evolve");
    group.sample_size(10);
    group.bench_function("w3_pop20", |b| b.iter(|| evolve(black_box(&t), &config).unwrap()));
    group.finish();
}

criterion_group!(benches, simulate, gradient, optimize, sample, baseline, ga);
criterion_main!(benches);
