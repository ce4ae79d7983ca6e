use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rbkvs::experiments::Topology;
use rbkvs::solvers::{Method, DEFAULT_HISTORY_STRIDE, DEFAULT_MAX_ITERS, DEFAULT_RSE_TOL};

/// Randomized block Kaczmarz with volume sampling.
///
/// Exit status: 0 success, 1 input error, 2 no convergence (or a failed check).
#[derive(Debug, Parser)]
#[command(name = "rbkvs", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve `A x = b` for a Matrix Market matrix and print the run record as JSON.
    Solve(SolveArgs),
    /// Run a benchmark described by a JSON experiment file or a bundled preset.
    Bench(BenchArgs),
    /// Average consensus on a line or cycle graph.
    Consensus(ConsensusArgs),
    /// Compare the fast pair sampler against exhaustive enumeration.
    SampleCheck(SampleCheckArgs),
    /// Build the pair-sampling tables for a matrix and store them in a cache.
    Preprocess(PreprocessArgs),
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, default_value = "rbkvs", value_parser = parse_method)]
    pub method: Method,
    /// Block size for volume sampling.
    #[arg(long = "s", default_value_t = 2)]
    pub block_size: usize,
    /// Block size of the random partition used by `rbk`.
    #[arg(long = "p", default_value_t = 2)]
    pub partition_block: usize,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    /// Stop once the relative solution error falls to this value.
    #[arg(long, default_value_t = DEFAULT_RSE_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    pub max_iters: u64,
    /// Record the error every this many iterations.
    #[arg(long, default_value_t = DEFAULT_HISTORY_STRIDE)]
    pub history_stride: u64,
    /// Seed for every random draw; chosen from the clock when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Matrix Market file.
    pub matrix: PathBuf,
    /// Right-hand side, one real per line.
    #[arg(required_unless_present = "planted", conflicts_with = "planted")]
    pub rhs: Option<PathBuf>,
    /// Generate a solution in the row space of A and set b = A x*.
    #[arg(long)]
    pub planted: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Reuse pair-sampling tables stored in this directory.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Write the final iterate here, one value per line.
    #[arg(long)]
    pub solution_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Experiment JSON file.
    #[arg(required_unless_present = "preset", conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Name of a bundled experiment (see `--list-presets`).
    #[arg(long)]
    pub preset: Option<String>,
    /// Print the bundled experiment names and exit.
    #[arg(long, exclusive = true)]
    pub list_presets: bool,
    /// Directory for the CSV and JSON reports.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for the trials.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Fill the wall-clock columns.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct ConsensusArgs {
    #[arg(long, value_parser = parse_topology)]
    pub graph: Topology,
    /// Number of vertices.
    #[arg(long, default_value_t = 300)]
    pub vertices: usize,
    /// Initial values, one per line; Gaussian when omitted.
    #[arg(long)]
    pub values: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct SampleCheckArgs {
    /// Matrix Market file.
    pub matrix: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    pub draws: usize,
    /// Largest total-variation distance that counts as a pass.
    #[arg(long, default_value_t = 0.02)]
    pub threshold: f64,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Matrix Market file.
    pub matrix: PathBuf,
    #[arg(long)]
    pub cache_dir: PathBuf,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse::<Method>().map_err(|e| e.to_string())
}

fn parse_topology(s: &str) -> Result<Topology, String> {
    match s.to_ascii_lowercase().as_str() {
        "line" => Ok(Topology::Line),
        "cycle" => Ok(Topology::Cycle),
        _ => Err(format!("unknown graph {s:?}; expected line or cycle")),
    }
}
