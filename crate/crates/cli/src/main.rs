use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use gasp_core::{
    aggregate, evolve, exact_synthesize, fidelity, gaussian_state, parse_qasm, parse_state, run_benchmark,
    sample_counts_seeded, to_qasm, w_state, write_csv, Aggregate, BenchRow, CircuitStats, Counts, EvolutionConfig,
    Family, GaussianSpec, Histogram, NoiseModel, StateVector,
};

/// Version of every JSON document this tool writes.
const SCHEMA: u32 = 1;

const EXIT_USAGE: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;

/// Genetic-algorithm synthesis of quantum state-preparation circuits.
#[derive(Parser)]
#[command(name = "gasp", version, about)]
struct Cli {
    /// Worker threads for rows, individuals and shot shards (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Write every wall-clock time as 0 so repeated runs are byte-identical.
    #[arg(long, global = true)]
    no_timing: bool,

    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a circuit preparing the target state.
    Synth(SynthArgs),
    /// Exact synthesis with uniformly controlled rotations.
    Baseline(TargetArgs),
    /// Sample measurement counts from a QASM circuit under gate and readout noise.
    Sample(SampleArgs),
    /// GASP vs baseline over a range of qubit counts.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, PartialEq)]
enum TargetSpec {
    Gaussian,
    W,
    File(PathBuf),
}

impl FromStr for TargetSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "w" => Ok(Self::W),
            _ => match s.strip_prefix("file:") {
                Some(path) if !path.is_empty() => Ok(Self::File(path.into())),
                _ => Err(format!("expected gaussian, w or file:PATH, got {s:?}")),
            },
        }
    }
}

impl std::fmt::Display for TargetSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Gaussian => f.write_str("gaussian"),
            Self::W => f.write_str("w"),
            Self::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[derive(Args)]
struct TargetArgs {
    /// gaussian, w, or file:PATH with one amplitude per token.
    #[arg(long)]
    target: TargetSpec,

    /// Qubit count; inferred from the amplitude count for file targets.
    #[arg(long)]
    qubits: Option<usize>,

    /// Circuit path; the JSON report goes next to it with a .json extension.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    target: TargetArgs,

    #[arg(long, default_value_t = 0.99)]
    fidelity: f64,

    #[arg(long, default_value_t = 100)]
    pop: usize,

    #[arg(long, default_value_t = 0.05)]
    mutation: f64,

    /// Generations without improvement before the genome grows by one gene.
    #[arg(long, default_value_t = 1000)]
    maxiter: usize,

    /// Hard cap on generations across all genome lengths.
    #[arg(long, default_value_t = 200_000)]
    max_generations: usize,

    /// Starting genome length (default 3 per qubit).
    #[arg(long)]
    initial_length: Option<usize>,

    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Clone, Copy)]
struct NoiseArgs {
    /// Error probability after each single-qubit gate.
    #[arg(long, default_value_t = 0.001)]
    p1: f64,

    /// Error probability per qubit after each CNOT.
    #[arg(long, default_value_t = 0.01)]
    p2: f64,

    /// Bit-flip probability per measured qubit.
    #[arg(long, default_value_t = 0.02)]
    readout: f64,
}

impl NoiseArgs {
    fn model(self) -> NoiseModel {
        NoiseModel { p1: self.p1, p2: self.p2, readout_flip: self.readout }
    }
}

#[derive(Args)]
struct SampleArgs {
    /// OpenQASM 2.0 file using rx, ry, rz and cx.
    #[arg(long)]
    circuit: PathBuf,

    #[arg(long, default_value_t = 16384)]
    shots: usize,

    #[command(flatten)]
    noise: NoiseArgs,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, default_value = "counts.json")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    family: Family,

    #[arg(long, default_value_t = 2)]
    min_qubits: usize,

    #[arg(long, default_value_t = 6)]
    max_qubits: usize,

    #[arg(long, default_value_t = 3)]
    repeats: usize,

    #[arg(long, default_value_t = 16384)]
    shots: usize,

    #[command(flatten)]
    noise: NoiseArgs,

    #[arg(long, default_value_t = 0.99)]
    fidelity: f64,

    #[arg(long, default_value_t = 100)]
    pop: usize,

    #[arg(long, default_value_t = 0.05)]
    mutation: f64,

    #[arg(long, default_value_t = 1000)]
    maxiter: usize,

    #[arg(long, default_value_t = 200_000)]
    max_generations: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap would exit 2 on usage errors, which here means "not converged"
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();

    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(workers) = cli.workers {
        if workers == 0 {
            bail!("--workers must be ≥ 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(workers).build_global()?;
    }
    let timing = !cli.no_timing;
    match cli.command {
        Command::Synth(args) => synth(args, timing),
        Command::Baseline(args) => baseline(args),
        Command::Sample(args) => sample(args),
        Command::Bench(args) => bench(args, timing),
    }
}

fn load_target(args: &TargetArgs) -> Result<StateVector> {
    let state = match &args.target {
        TargetSpec::Gaussian => gaussian_state(&GaussianSpec::centered(require_qubits(args)?))?,
        TargetSpec::W => w_state(require_qubits(args)?)?,
        TargetSpec::File(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let state = parse_state(&text).with_context(|| format!("parsing {}", path.display()))?;
            if let Some(n) = args.qubits.filter(|&n| n != state.n_qubits()) {
                bail!("--qubits {n} but {} holds {} amplitudes", path.display(), state.dim());
            }
            state
        }
    };
    Ok(state)
}

fn require_qubits(args: &TargetArgs) -> Result<usize> {
    args.qubits.with_context(|| format!("--qubits is required for --target {}", args.target))
}

#[derive(Serialize)]
struct SynthReport<'a> {
    schema: u32,
    command: &'static str,
    target: String,
    n_qubits: usize,
    config: &'a EvolutionConfig,
    fidelity: f64,
    converged: bool,
    generations: usize,
    escalations: usize,
    final_length: usize,
    stats: CircuitStats,
    wall_time: f64,
    fitness_trace: &'a [(usize, f64)],
}

fn synth(args: SynthArgs, timing: bool) -> Result<ExitCode> {
    let target = load_target(&args.target)?;
    let config = EvolutionConfig {
        population_size: args.pop,
        mutation_rate: args.mutation,
        fidelity_goal: args.fidelity,
        maxiter: args.maxiter,
        initial_length: args.initial_length,
        max_total_generations: args.max_generations,
        seed: args.seed,
        ..EvolutionConfig::default()
    };
    let report = evolve(&target, &config)?;
    let out = args.target.out.clone().unwrap_or_else(|| "gasp.qasm".into());
    write_file(&out, &to_qasm(&report.best))?;
    write_json(
        &out.with_extension("json"),
        &SynthReport {
            schema: SCHEMA,
            command: "synth",
            target: args.target.target.to_string(),
            n_qubits: target.n_qubits(),
            config: &config,
            fidelity: report.best_fitness,
            converged: report.converged,
            generations: report.generations,
            escalations: report.escalations,
            final_length: report.final_length,
            stats: report.stats,
            wall_time: if timing { report.wall_time } else { 0.0 },
            fitness_trace: &report.fitness_trace,
        },
    )?;
    log::info!(
        "fidelity {:.6} after {} generations, {} gates",
        report.best_fitness,
        report.generations,
        report.stats.total_gates
    );
    if report.converged {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("not converged: best fidelity {:.6} < {}", report.best_fitness, config.fidelity_goal);
        Ok(ExitCode::from(EXIT_NOT_CONVERGED))
    }
}

#[derive(Serialize)]
struct BaselineReport {
    schema: u32,
    command: &'static str,
    target: String,
    n_qubits: usize,
    fidelity: f64,
    stats: CircuitStats,
}

fn baseline(args: TargetArgs) -> Result<ExitCode> {
    let target = load_target(&args)?;
    let circuit = exact_synthesize(&target);
    let out = args.out.clone().unwrap_or_else(|| "baseline.qasm".into());
    write_file(&out, &to_qasm(&circuit))?;
    write_json(
        &out.with_extension("json"),
        &BaselineReport {
            schema: SCHEMA,
            command: "baseline",
            target: args.target.to_string(),
            n_qubits: target.n_qubits(),
            fidelity: fidelity(&target, &circuit.state()?)?,
            stats: circuit.stats(),
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SampleReport<'a> {
    schema: u32,
    command: &'static str,
    circuit: String,
    n_qubits: usize,
    shots: usize,
    seed: u64,
    noise: NoiseModel,
    counts: &'a Counts,
}

fn sample(args: SampleArgs) -> Result<ExitCode> {
    if args.shots == 0 {
        bail!("--shots must be ≥ 1");
    }
    let text = fs::read_to_string(&args.circuit).with_context(|| format!("reading {}", args.circuit.display()))?;
    let circuit = parse_qasm(&text).with_context(|| format!("parsing {}", args.circuit.display()))?;
    let noise = args.noise.model();
    let counts = sample_counts_seeded(&circuit, &noise, args.shots, args.seed)?;
    write_json(
        &args.out,
        &SampleReport {
            schema: SCHEMA,
            command: "sample",
            circuit: args.circuit.display().to_string(),
            n_qubits: circuit.n_qubits(),
            shots: args.shots,
            seed: args.seed,
            noise,
            counts: &counts,
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct BenchReport<'a> {
    schema: u32,
    command: &'static str,
    family: Family,
    min_qubits: usize,
    max_qubits: usize,
    repeats: usize,
    shots: usize,
    noise: NoiseModel,
    config: &'a EvolutionConfig,
    rows: &'a [BenchRow],
    aggregates: &'a [Aggregate],
}

#[derive(Serialize)]
struct HistogramDump<'a> {
    schema: u32,
    family: Family,
    shots: usize,
    histograms: &'a [Histogram],
}

fn bench(args: BenchArgs, timing: bool) -> Result<ExitCode> {
    if args.min_qubits > args.max_qubits {
        bail!("--min-qubits {} exceeds --max-qubits {}", args.min_qubits, args.max_qubits);
    }
    let config = EvolutionConfig {
        population_size: args.pop,
        mutation_rate: args.mutation,
        fidelity_goal: args.fidelity,
        maxiter: args.maxiter,
        max_total_generations: args.max_generations,
        seed: args.seed,
        ..EvolutionConfig::default()
    };
    let noise = args.noise.model();
    let mut result =
        run_benchmark(args.family, args.min_qubits..=args.max_qubits, &config, &noise, args.shots, args.repeats)?;
    if !timing {
        result.rows.iter_mut().for_each(|r| r.wall_time = 0.0);
    }
    let aggregates = aggregate(&result.rows);

    let dir = &args.out;
    fs::create_dir_all(dir.join("circuits")).with_context(|| format!("creating {}", dir.display()))?;
    let family = args.family;
    let mut csv = Vec::new();
    write_csv(&result.rows, &mut csv)?;
    write_file(&dir.join(format!("{family}.csv")), std::str::from_utf8(&csv)?)?;
    write_json(
        &dir.join(format!("{family}.json")),
        &BenchReport {
            schema: SCHEMA,
            command: "bench",
            family,
            min_qubits: args.min_qubits,
            max_qubits: args.max_qubits,
            repeats: args.repeats,
            shots: args.shots,
            noise,
            config: &config,
            rows: &result.rows,
            aggregates: &aggregates,
        },
    )?;
    write_json(
        &dir.join(format!("{family}_histograms.json")),
        &HistogramDump { schema: SCHEMA, family, shots: args.shots, histograms: &result.histograms },
    )?;
    for (row, circuit) in result.rows.iter().zip(&result.circuits) {
        let name = format!("{family}_n{}_r{}_{}.qasm", row.n, row.repeat, row.method);
        write_file(&dir.join("circuits").join(name), &to_qasm(circuit))?;
    }

    for a in &aggregates {
        println!(
            "{family} n={} {:<8} gates {:6.1} ± {:4.1}  cx {:6.1}  noisy fidelity {:.4} ± {:.4}  converged {}/{}",
            a.n,
            a.method,
            a.total_gates.mean,
            a.total_gates.stderr,
            a.cnot_count.mean,
            a.noisy_classical_fidelity.mean,
            a.noisy_classical_fidelity.stderr,
            a.converged_runs,
            a.runs
        );
    }
    if result.rows.iter().all(|r| !r.converged) {
        eprintln!("every run failed to converge");
        return Ok(ExitCode::from(EXIT_NOT_CONVERGED));
    }
    Ok(ExitCode::SUCCESS)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, &text)
}
