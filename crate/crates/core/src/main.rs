use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fedsurr::harness::{emit_summary, emit_traces, render_plot, run_experiment, SweepFile};
use fedsurr::{
    AcquisitionKind, Aggregator, Error, Execution, ExperimentConfig, ProblemId, Result, Settings, TrainingSpace,
};

#[derive(Parser)]
#[command(name = "fedsurr", version, about = "Federated surrogate-assisted evolutionary optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment configuration for several seeds.
    Run(Box<RunArgs>),
    /// Run every combination of a parameter grid read from a TOML file.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_parser = parse_problem)]
    problem: ProblemId,
    #[arg(long)]
    dim: usize,
    /// Total number of clients.
    #[arg(long)]
    clients: Option<usize>,
    /// Fraction of clients taking part in each round.
    #[arg(long)]
    lambda: Option<f64>,
    /// Local training epochs per round.
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Coordinates for local gradient steps: standardized or raw.
    #[arg(long)]
    train_space: Option<TrainingSpace>,
    /// RBF nodes per surrogate (default 2*dim + 1).
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    mu: Option<f64>,
    /// Infeasible-domain width (0 = IID).
    #[arg(long)]
    tau: Option<usize>,
    /// Dimension inspected by the feasibility test.
    #[arg(long)]
    feasible_dim: Option<usize>,
    /// Noise level in [0, 1].
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_parser = parse_acq)]
    acq: Option<AcquisitionKind>,
    #[arg(long, value_parser = parse_agg)]
    agg: Option<Aggregator>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    crossover_prob: Option<f64>,
    #[arg(long)]
    mutation_prob: Option<f64>,
    #[arg(long)]
    eta_c: Option<f64>,
    #[arg(long)]
    eta_m: Option<f64>,
    #[arg(long)]
    tournament: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep definition with `[base]` settings and a `[grid]` table.
    config: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Also render a convergence plot (SVG).
    #[arg(long)]
    plot: bool,
    /// Run everything on the calling thread.
    #[arg(long)]
    sequential: bool,
}

fn parse_problem(s: &str) -> Result<ProblemId> {
    s.parse()
}

fn parse_acq(s: &str) -> Result<AcquisitionKind> {
    s.parse()
}

fn parse_agg(s: &str) -> Result<Aggregator> {
    s.parse()
}

impl RunArgs {
    fn settings(&self) -> Settings {
        Settings {
            problem: Some(self.problem),
            dim: Some(self.dim),
            clients: self.clients,
            lambda: self.lambda,
            epochs: self.epochs,
            lr: self.lr,
            train_space: self.train_space,
            nodes: self.nodes,
            mu: self.mu,
            tau: self.tau,
            feasible_dim: self.feasible_dim,
            alpha: self.alpha,
            acq: self.acq,
            agg: self.agg,
            runs: self.runs,
            seed: self.seed,
            population: self.population,
            generations: self.generations,
            crossover_prob: self.crossover_prob,
            mutation_prob: self.mutation_prob,
            eta_c: self.eta_c,
            eta_m: self.eta_m,
            tournament: self.tournament,
        }
    }
}

fn execute(cfg: &ExperimentConfig, dir: &Path, output: &OutputArgs) -> Result<()> {
    let exec = if output.sequential { Execution::Sequential } else { Execution::default() };
    eprintln!(
        "{} d={} N={} lambda={} acq={} agg={} tau={} alpha={} runs={} seed={}",
        cfg.problem,
        cfg.dim,
        cfg.clients,
        cfg.participation,
        cfg.acquisition,
        cfg.aggregator,
        cfg.tau,
        cfg.alpha.alpha(),
        cfg.runs,
        cfg.master_seed
    );
    let (summary, traces) = run_experiment(cfg, exec)?;
    fs::create_dir_all(dir)?;
    emit_summary(&summary, BufWriter::new(File::create(dir.join("summary.toml"))?))?;
    emit_traces(&traces, BufWriter::new(File::create(dir.join("traces.csv"))?))?;
    if output.plot {
        let desc = toml::to_string(cfg).map_err(|e| Error::Config(e.to_string()))?;
        render_plot(&traces, &desc, BufWriter::new(File::create(dir.join("convergence.svg"))?))?;
    }
    eprintln!("  mean final best {:.6e} +- {:.6e} -> {}", summary.mean, summary.std, dir.display());
    Ok(())
}

fn main_inner(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.settings().to_config()?;
            execute(&cfg, &args.output.out, &args.output)
        }
        Command::Sweep(args) => {
            let text = fs::read_to_string(&args.config)?;
            let points = SweepFile::parse(&text)?.expand()?;
            for point in &points {
                execute(&point.config, &args.output.out.join(&point.label), &args.output)?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
