//! `netcode-mp`: validate, encode, decode and inspect network codes.
//!
//! Exit status is 0 on success, 1 when validation or decoding fails and 2 on
//! usage errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "netcode-mp", version, about = "Decode network codes by message passing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a network description and report problems.
    Validate(Common),
    /// Encode source values and print every link symbol.
    Encode(EncodeArgs),
    /// Decode a sink's observations.
    Decode(DecodeArgs),
    /// Export the factor graph after a transform stage.
    Graph(GraphArgs),
    /// Field-operation counts of both decoders on the chain network, as CSV.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    net: PathBuf,
    /// Replace the coefficients by a random code over this field, e.g. GF(16).
    #[arg(long)]
    field: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EncodeArgs {
    #[command(flatten)]
    common: Common,
    /// Inline values such as `y1=1;y2=0`.
    #[arg(long, conflicts_with = "sources_file")]
    sources: Option<String>,
    /// File with one `source <id> = <value>` per line.
    #[arg(long)]
    sources_file: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct PipelineArgs {
    /// Comma-separated variable ids; default all sources.
    #[arg(long, value_delimiter = ',')]
    targets: Vec<String>,
    #[arg(long)]
    no_prune: bool,
    #[arg(long)]
    no_simplify: bool,
    /// `auto`, `off`, or a file with one group of factor ids per line.
    #[arg(long, default_value = "auto")]
    cluster: String,
    #[arg(long, default_value_t = 1000)]
    max_iterations: usize,
}

#[derive(Args, Debug)]
struct DecodeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    obs: PathBuf,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Also run Gaussian elimination and report agreement.
    #[arg(long)]
    baseline: bool,
    /// Cross-check against brute-force enumeration.
    #[arg(long)]
    oracle: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Stage {
    Raw,
    Simplified,
    Pruned,
    Clustered,
}

#[derive(Args, Debug)]
struct GraphArgs {
    #[command(flatten)]
    common: Common,
    /// Observation file; default: the declared sink's links.
    #[arg(long, conflicts_with = "sink")]
    obs: Option<PathBuf>,
    /// Declared sink to build the graph for; default the first one.
    #[arg(long)]
    sink: Option<String>,
    #[arg(long, value_enum, default_value = "raw")]
    stage: Stage,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, default_value = "chain")]
    topology: String,
    #[arg(long = "K", value_delimiter = ',', default_value = "4,8,16,32")]
    k: Vec<usize>,
    #[arg(long, default_value = "GF(16)")]
    field: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate(a) => commands::validate(&a),
        Command::Encode(a) => commands::encode(&a),
        Command::Decode(a) => commands::decode(&a),
        Command::Graph(a) => commands::graph(&a),
        Command::Bench(a) => commands::bench(&a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.exit_code()
        }
    }
}
