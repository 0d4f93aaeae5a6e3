use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ringbal::harness::output::{write_atomically, write_json};
use ringbal::harness::report::write_compare_csv;
use ringbal::harness::{
    bound_report, certify, compare_betas, emit_plot_data, gap_curve_config, run_experiment,
    write_experiment, CertifyOptions, CertifyTarget, ExperimentConfig, PotentialSelection,
};
use ringbal::{Error, ProcessKind, TopologyKind, WeightDistribution};

#[derive(Parser)]
#[command(
    name = "ringbal",
    version,
    about = "Averaging load balancing on rings: simulation and bound checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run replicated trajectories and write per-sample records as CSV.
    Simulate(SimulateArgs),
    /// Print the potential bounds and the gap chain for one ring size.
    Bounds(BoundsArgs),
    /// Run a deterministic certification suite and write a JSON report.
    Certify(CertifyArgs),
    /// Mean normalized gap over time for averaging on the cycle.
    Figure1(FigureArgs),
    /// Steady-state gap of the β-hybrid for several β.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TopologyArg {
    Cycle,
    Harary2,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProcessArg {
    Averaging,
    TwoChoice,
    Hybrid,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightsArg {
    Unit,
    Uniform,
    Exp,
}

#[derive(Clone, Copy, ValueEnum)]
enum PotentialsArg {
    Powers,
    All,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum WhatArg {
    FixedPoint,
    ZChain,
    Oracle,
    Cover,
    Lemmas,
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    topology: TopologyArg,
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum)]
    process: ProcessArg,
    /// Averaging probability of the hybrid process.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_enum)]
    weights: WeightsArg,
    #[arg(long)]
    steps: u64,
    #[arg(long)]
    runs: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    sample_every: Option<u64>,
    #[arg(long)]
    burn_in: Option<u64>,
    #[arg(long, value_enum, default_value = "powers")]
    potentials: PotentialsArg,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct BoundsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    ew2: f64,
    /// Also measure the steady-state gap with this many runs.
    #[arg(long, default_value_t = 0)]
    runs: usize,
    /// Steps per measurement run (default 200·n²).
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct CertifyArgs {
    #[arg(long, value_enum)]
    what: WhatArg,
    #[arg(long)]
    n_max: usize,
    #[arg(long, default_value_t = 10_000)]
    iterations: usize,
    #[arg(long, default_value_t = 200)]
    states: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct FigureArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    runs: usize,
    /// Steps per run (default 200·n²).
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct CompareArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
    betas: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    runs: usize,
    /// Steps per run (default 200·n²).
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "cycle")]
    topology: TopologyArg,
    #[arg(long, value_enum, default_value = "unit")]
    weights: WeightsArg,
    #[arg(long)]
    out: PathBuf,
}

impl From<TopologyArg> for TopologyKind {
    fn from(t: TopologyArg) -> Self {
        match t {
            TopologyArg::Cycle => TopologyKind::Cycle,
            TopologyArg::Harary2 => TopologyKind::Harary2,
        }
    }
}

impl From<WeightsArg> for WeightDistribution {
    fn from(w: WeightsArg) -> Self {
        match w {
            WeightsArg::Unit => WeightDistribution::Unit,
            WeightsArg::Uniform => WeightDistribution::UniformSecondMomentOne,
            WeightsArg::Exp => WeightDistribution::ExponentialSecondMomentOne,
        }
    }
}

impl From<WhatArg> for CertifyTarget {
    fn from(w: WhatArg) -> Self {
        match w {
            WhatArg::FixedPoint => CertifyTarget::FixedPoint,
            WhatArg::ZChain => CertifyTarget::ZChain,
            WhatArg::Oracle => CertifyTarget::Oracle,
            WhatArg::Cover => CertifyTarget::Cover,
            WhatArg::Lemmas => CertifyTarget::Lemmas,
        }
    }
}

enum Failure {
    Error(Error),
    Certification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn default_steps(n: usize) -> u64 {
    200 * (n as u64) * (n as u64)
}

fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let process = match (a.process, a.beta) {
        (ProcessArg::Averaging, None) => ProcessKind::Averaging,
        (ProcessArg::TwoChoice, None) => ProcessKind::TwoChoice,
        (ProcessArg::Hybrid, Some(beta)) => ProcessKind::Hybrid { beta },
        (ProcessArg::Hybrid, None) => {
            return Err(Error::Config("--process hybrid needs --beta".into()).into())
        }
        (_, Some(_)) => {
            return Err(Error::Config("--beta only applies to --process hybrid".into()).into())
        }
    };
    let config = ExperimentConfig {
        topology: a.topology.into(),
        n: a.n,
        process,
        weights: a.weights.into(),
        steps: a.steps,
        runs: a.runs,
        seed: a.seed,
        sample_every: a.sample_every,
        burn_in: a.burn_in,
        potentials: match a.potentials {
            PotentialsArg::Powers => PotentialSelection::Powers,
            PotentialsArg::All => PotentialSelection::All,
            PotentialsArg::None => PotentialSelection::None,
        },
        workers: a.workers,
        out: Some(a.out.clone()),
    };
    let output = run_experiment(&config)?;
    write_experiment(&output, &a.out)?;
    let s = output.aggregate()?.steady;
    println!(
        "{} records; steady state from t = {}: gap {:.4} ± {:.4}, gap/√n {:.4}, gap²/n {:.4}",
        output.records.len(),
        s.window_start,
        s.gap.mean,
        s.gap.se,
        s.normalized_gap.mean,
        s.gap_squared_over_n.mean
    );
    Ok(())
}

fn bounds(a: BoundsArgs) -> Result<(), Failure> {
    let mut report = bound_report(a.n, a.ew2)?;
    if a.runs > 0 {
        let mut config = gap_curve_config(a.n, a.runs, a.seed);
        config.steps = a.steps.unwrap_or(default_steps(a.n));
        let stats = run_experiment(&config)?.aggregate()?;
        report = report.with_measurement(&config, &stats)?;
    }
    match a.out {
        Some(path) => write_json(&path, &report)?,
        None => println!(
            "{}",
            serde_json::to_string_pretty(&report).map_err(Error::from)?
        ),
    }
    Ok(())
}

fn run_certify(a: CertifyArgs) -> Result<(), Failure> {
    let opts = CertifyOptions {
        n_max: a.n_max,
        iterations: a.iterations,
        states: a.states,
        seed: a.seed,
    };
    let report = certify(a.what.into(), &opts)?;
    write_json(&a.out, &report)?;
    println!(
        "{:?}: {} checks, {}",
        report.what,
        report.checks,
        if report.passed { "passed" } else { "FAILED" }
    );
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Certification(format!(
            "{:?} certification failed",
            report.what
        )))
    }
}

fn figure1(a: FigureArgs) -> Result<(), Failure> {
    let mut config = gap_curve_config(a.n, a.runs, a.seed);
    config.steps = a.steps.unwrap_or(default_steps(a.n));
    let stats = run_experiment(&config)?.aggregate()?;
    emit_plot_data(&stats, &a.out)?;
    println!(
        "{} samples; trailing-20% mean gap/√n = {:.4}",
        stats.times.len(),
        stats.trailing_mean_normalized_gap(0.2)
    );
    Ok(())
}

fn compare(a: CompareArgs) -> Result<(), Failure> {
    let mut base = gap_curve_config(a.n, a.runs, a.seed);
    base.steps = a.steps.unwrap_or(default_steps(a.n));
    base.topology = a.topology.into();
    base.weights = a.weights.into();
    let table = compare_betas(&base, &a.betas)?;
    write_atomically(&a.out, |w| write_compare_csv(w, &table))?;
    for r in &table.rows {
        println!("beta {:<5} gap {:.4} ± {:.4}", r.beta, r.mean_gap, r.se_gap);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Bounds(a) => bounds(a),
        Command::Certify(a) => run_certify(a),
        Command::Figure1(a) => figure1(a),
        Command::Compare(a) => compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Certification(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io(_) | Error::Json(_) => 4,
                Error::InvalidParameter(_) | Error::Config(_) | Error::Aggregation(_) => 2,
            })
        }
    }
}
