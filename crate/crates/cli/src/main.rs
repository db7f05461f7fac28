//! `matscale` command-line tool.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "matscale", version, about = "Matrix scaling and balancing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find D with D A D^-1 balanced.
    Balance(SolveArgs),
    /// Find X, Y with X A Y having prescribed row and column sums.
    Scale(ScaleArgs),
    /// Run several methods and tolerances and print a CSV table.
    Compare(CompareArgs),
    /// Report matrix statistics, strong connectivity and scalability.
    Check(CheckArgs),
    /// Write a random instance in Matrix Market format.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Newton,
    Ipm,
    Osborne,
    Sinkhorn,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Newton => "newton",
            Method::Ipm => "ipm",
            Method::Osborne => "osborne",
            Method::Sinkhorn => "sinkhorn",
        }
    }
}

#[derive(Args, Clone)]
pub struct SolveArgs {
    /// Matrix Market file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = Method::Newton)]
    pub method: Method,
    /// JSON report path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Log-factors, one per line.
    #[arg(long)]
    pub factors_out: Option<PathBuf>,
    /// Scaled or balanced matrix in Matrix Market format.
    #[arg(long)]
    pub matrix_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest box guess tried by the newton and ipm methods.
    #[arg(long = "max-b", default_value_t = 65536.0)]
    pub max_b: f64,
    /// Sweep limit for osborne and sinkhorn.
    #[arg(long, default_value_t = 100_000)]
    pub max_sweeps: usize,
    /// Use the adaptive long-step schedule in the ipm method.
    #[arg(long)]
    pub ipm_long_step: bool,
    /// Include the per-iteration trace in the report.
    #[arg(long)]
    pub trace: bool,
    /// Omit wall-clock time so reports are reproducible byte for byte.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Args, Clone)]
pub struct Targets {
    /// Row sums: a file of numbers or `uniform`.
    #[arg(long, default_value = "uniform")]
    pub rows: String,
    /// Column sums: a file of numbers or `uniform`.
    #[arg(long, default_value = "uniform")]
    pub cols: String,
}

#[derive(Args)]
pub struct ScaleArgs {
    #[command(flatten)]
    pub solve: SolveArgs,
    #[command(flatten)]
    pub targets: Targets,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Task {
    Balance,
    Scale,
}

#[derive(Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Task::Balance)]
    pub task: Task,
    /// Comma-separated tolerances.
    #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-4,1e-6")]
    pub eps: Vec<f64>,
    /// Comma-separated methods.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "newton,ipm")]
    pub methods: Vec<Method>,
    #[command(flatten)]
    pub targets: Targets,
    /// CSV path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "max-b", default_value_t = 65536.0)]
    pub max_b: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_sweeps: usize,
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Also test scalability to these row sums (file or `uniform`).
    #[arg(long)]
    pub rows: Option<String>,
    #[arg(long)]
    pub cols: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// Hamiltonian cycle plus random entries.
    StronglyConnected,
    /// Random permutation plus random entries.
    Matching,
    /// All entries positive.
    Positive,
}

#[derive(Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum, default_value_t = Kind::StronglyConnected)]
    pub kind: Kind,
    #[arg(long)]
    pub n: usize,
    /// Target number of entries.
    #[arg(long, default_value_t = 0)]
    pub m: usize,
    /// Entries are `exp(U(-spread, spread))`.
    #[arg(long, default_value_t = 1.0)]
    pub spread: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Balance(a) => commands::balance(&a),
        Command::Scale(a) => commands::scale(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Check(a) => commands::check(&a),
        Command::Generate(a) => commands::generate(&a),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("matscale: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
