//! `sparsemorse`: landscape analysis of sparsity-constrained least squares from the command line.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod output;

#[derive(Parser)]
#[command(name = "sparsemorse", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate and classify every M-stationary point
    Analyze(TableArgs),
    /// Check that every s-column submatrix of A has full rank
    Regularity(InstanceArgs),
    /// Count level-set components between consecutive stationary values
    Sweep(TableArgs),
    /// Probe strong stability of stationary points under random data perturbations
    Probe(ProbeArgs),
    /// Genericity experiment on seeded Gaussian instances
    Generic(GenericArgs),
    /// Run iterative hard thresholding and match its limits against the landscape
    Iht(IhtArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Write the report here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Add a `generated_at` field (seconds since the Unix epoch)
    #[arg(long)]
    timestamp: bool,
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance file (.json, or .csv)
    #[arg(long, value_name = "PATH")]
    instance: PathBuf,
    #[arg(long, value_name = "F")]
    zero_tol: Option<f64>,
    #[arg(long, value_name = "F")]
    stat_tol: Option<f64>,
    #[arg(long, value_name = "F")]
    rank_tol: Option<f64>,
    /// Worker threads
    #[arg(long, default_value_t = 1, value_name = "INT")]
    threads: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct TableArgs {
    #[command(flatten)]
    common: InstanceArgs,
    /// Emit a flat CSV table instead of JSON
    #[arg(long, conflicts_with = "timestamp")]
    csv: bool,
}

#[derive(Args)]
struct ProbeArgs {
    #[command(flatten)]
    common: InstanceArgs,
    #[arg(long, value_name = "INT")]
    seed: u64,
    /// Perturbations per point
    #[arg(long, default_value_t = 50, value_name = "INT")]
    trials: usize,
    /// Closeness radius; defaults to a quarter of the smallest distance between points
    #[arg(long, value_name = "F")]
    epsilon: Option<f64>,
    /// Perturbation size ‖(E, e)‖
    #[arg(long, default_value_t = 1e-3, value_name = "F")]
    delta: f64,
    /// Shift every entry of b by delta instead of sampling Gaussian perturbations
    #[arg(long)]
    paper_mode: bool,
    /// Index into the `points` array of the analyze report; all points when omitted
    #[arg(long, value_name = "INDEX")]
    point: Option<usize>,
}

#[derive(Args)]
struct GenericArgs {
    #[arg(long, value_name = "INT")]
    m: usize,
    #[arg(long, value_name = "INT")]
    n: usize,
    #[arg(long, value_name = "INT")]
    s: usize,
    #[arg(long, value_name = "INT")]
    trials: u64,
    #[arg(long, value_name = "INT")]
    seed: u64,
    #[arg(long, default_value_t = 1, value_name = "INT")]
    threads: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct IhtArgs {
    #[command(flatten)]
    common: InstanceArgs,
    /// Number of Gaussian random starts; a single run from zero when omitted
    #[arg(long, requires = "seed", value_name = "INT")]
    trials: Option<usize>,
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
    #[arg(long, default_value_t = 10_000, value_name = "INT")]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-12, value_name = "F")]
    step_tol: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => commands::analyze(&a),
        Command::Regularity(a) => commands::regularity(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Probe(a) => commands::probe(&a),
        Command::Generic(a) => commands::generic(&a),
        Command::Iht(a) => commands::iht(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
