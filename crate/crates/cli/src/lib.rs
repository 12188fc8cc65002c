//! The `pathrunner` command line: corpus preparation, training, generation,
//! evaluation and a local HTTP server.

pub mod commands;
pub mod config;
pub mod files;
pub mod server;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "pathrunner", version, about = "Generate Lode Runner levels around learned player paths")]
pub struct Cli {
    /// Flat TOML file of defaults; flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write seeded classic-layout 32x22 levels.
    SynthLevels(SynthArgs),
    /// Pair levels with path lines and write the annotated corpus.
    Ingest(IngestArgs),
    /// Derive a path for each level with the greedy A* gold tour.
    Solve(SolveArgs),
    /// Train the LSTM path model.
    TrainPaths(TrainPathsArgs),
    /// Train the Markov chain, action compatibility and entity statistics.
    TrainChain(TrainChainArgs),
    /// Generate levels.
    Gen(GenArgs),
    /// Evaluate a directory of levels.
    Eval(EvalArgs),
    /// Compare two directories of levels.
    Compare(CompareArgs),
    /// Serve generation and evaluation over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Directory of level text files.
    #[arg(long)]
    pub levels: Option<PathBuf>,
    /// Path file with one line per level, in file-name order.
    #[arg(long)]
    pub paths: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub levels: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainPathsArgs {
    #[arg(long)]
    pub paths: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub dropout_rate: Option<f64>,
    #[arg(long)]
    pub clip_norm: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub hidden_size: Option<usize>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub chunk_len: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainChainArgs {
    /// Annotated corpus written by `ingest`.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub paths_model: Option<PathBuf>,
    #[arg(long)]
    pub level_model: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub count: Option<usize>,
    /// Level i uses seed + i.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub path_length: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub levels: Option<PathBuf>,
    /// JSON report destination; a summary line goes to stdout regardless.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Table,
    Tsv,
    Json,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub set_a: PathBuf,
    pub set_b: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<ReportFormat>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub host: Option<String>,
    #[arg(long)]
    pub port: Option<u16>,
    /// Without both models the generation endpoints answer 503.
    #[arg(long)]
    pub paths_model: Option<PathBuf>,
    #[arg(long)]
    pub level_model: Option<PathBuf>,
}

/// Parse `args` and run; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match commands::execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
