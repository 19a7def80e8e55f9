//! `matnc`: build, search, plan, simulate and check multi-amplitude
//! contractions of quantum circuits.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Usage errors exit with 2, everything else with 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Runtime(e.into())
    }
}

macro_rules! value_enum_from_str {
    ($t:ty) => {
        impl FromStr for $t {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                <$t as ValueEnum>::from_str(s, true)
            }
        }
    };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    Single,
    Multi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WidthsArg {
    /// Prefix counts of the supplied bitstrings.
    Exact,
    /// Expected prefix counts of `--k` uniform random bitstrings.
    Model,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PrecisionArg {
    F32,
    F64,
}

value_enum_from_str!(LossArg);
value_enum_from_str!(WidthsArg);
value_enum_from_str!(PrecisionArg);

#[derive(Parser, Debug)]
#[command(name = "matnc", version, about = "Multi-amplitude tensor-network contraction of quantum circuits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a random circuit on a square grid and optionally random bitstrings.
    Generate(GenerateArgs),
    /// Search a contraction order and write order.json and report.json.
    Search(SearchArgs),
    /// Cost report of an order (greedy when no order is given).
    Report(ReportArgs),
    /// Reuse tree and memory plan of an order for the requested bitstrings.
    Plan(PlanArgs),
    /// Compute the requested amplitudes; writes amplitudes.jsonl and summary.json.
    Simulate(SimulateArgs),
    /// Reference amplitudes from a full state vector; writes oracle.jsonl.
    Oracle(OracleArgs),
    /// Fidelity estimate and histogram from an amplitude file.
    Xeb(XebArgs),
    /// Cost-model sweep over the number of amplitudes; writes scaling.csv.
    Scaling(ScalingArgs),
}

/// Inputs shared by most subcommands. Every option may also come from the
/// config file under its long name; flags win over the file.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Circuit file.
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    /// Bitstrings file, one string per line.
    #[arg(long)]
    pub bitstrings: Option<PathBuf>,
    /// Order document written by `search`.
    #[arg(long)]
    pub order: Option<PathBuf>,
    /// Random seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for output files [default: .].
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct WidthsOpts {
    /// Where layer widths come from [default: exact].
    #[arg(long, value_enum)]
    pub widths: Option<WidthsArg>,
    /// Number of amplitudes for `--widths model`.
    #[arg(long)]
    pub k: Option<u64>,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Number of qubits.
    #[arg(long)]
    pub qubits: Option<usize>,
    /// Number of cycles.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Also write this many random bitstrings to bitstrings.txt.
    #[arg(long)]
    pub random_bitstrings: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub widths: WidthsOpts,
    /// Loss minimized by the search [default: multi].
    #[arg(long, value_enum)]
    pub loss: Option<LossArg>,
    /// Number of annealing moves [default: 20000].
    #[arg(long)]
    pub budget: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub widths: WidthsOpts,
}

#[derive(Args, Debug)]
pub struct PlanArgs {
    #[command(flatten)]
    pub common: Common,
    /// Slice until every intermediate has at most this rank.
    #[arg(long)]
    pub max_rank: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Slice until every intermediate has at most this rank.
    #[arg(long)]
    pub max_rank: Option<usize>,
    /// Worker threads [default: 1].
    #[arg(long)]
    pub workers: Option<usize>,
    /// Floating-point precision of the contraction [default: f64].
    #[arg(long, value_enum)]
    pub precision: Option<PrecisionArg>,
    /// Largest tensor the kernel may allocate, in elements [default: 2^28].
    #[arg(long)]
    pub max_elements: Option<usize>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: Common,
    /// Refuse circuits wider than this [default: 20].
    #[arg(long)]
    pub max_qubits: Option<usize>,
}

#[derive(Args, Debug)]
pub struct XebArgs {
    #[command(flatten)]
    pub common: Common,
    /// Amplitude file in the `simulate` / `oracle` format.
    #[arg(long)]
    pub amplitudes: Option<PathBuf>,
    /// Histogram bins [default: 50].
    #[arg(long)]
    pub bins: Option<usize>,
    /// Logarithmic bins in `N·p`.
    #[arg(long)]
    pub log_x: bool,
}

#[derive(Args, Debug)]
pub struct ScalingArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated k values [default: powers of two up to --k-max].
    #[arg(long, value_delimiter = ',')]
    pub ks: Option<Vec<u64>>,
    /// Largest k for the default power-of-two sweep [default: 1024].
    #[arg(long)]
    pub k_max: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
