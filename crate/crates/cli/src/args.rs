use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use partmatch_core::query::Semantics;
use partmatch_core::routing::Design;
use partmatch_core::synth::SynthModel;

#[derive(Debug, Parser)]
#[command(name = "partmatch", version, about = "Partition-parallel graph pattern matching")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute one query and optionally compare against the brute-force oracle.
    Run(RunArgs),
    /// Print a vertex-to-partition assignment with cut and balance.
    Partition(PartitionArgs),
    /// Sweep designs, worker counts and redundancy; write summary and metrics CSVs.
    Bench(BenchArgs),
    /// Write a synthetic graph in the graph text format.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GraphSource {
    /// Graph file, one `src label dst` edge per line.
    #[arg(long, required_unless_present = "synth_vertices", conflicts_with = "synth_vertices")]
    pub graph: Option<PathBuf>,

    /// Generate the graph instead: number of vertices.
    #[arg(long, requires = "synth_edges")]
    pub synth_vertices: Option<usize>,

    #[arg(long)]
    pub synth_edges: Option<usize>,

    #[arg(long, default_value_t = 1)]
    pub synth_labels: usize,

    #[arg(long, default_value = "clustered", value_parser = parse_model)]
    pub synth_model: SynthModel,
}

#[derive(Debug, Clone, Args)]
pub struct DesignArgs {
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    pub partitions: u32,

    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub nodes: u32,

    #[arg(long, default_value_t = partmatch_core::partition::DEFAULT_EPSILON)]
    pub epsilon: f64,

    /// Seeds the partitioner and the synthetic graph generator.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value = "homomorphism", value_parser = parse_semantics)]
    pub semantics: Semantics,

    /// Messages a worker drains per partition claim.
    #[arg(long, default_value_t = partmatch_core::engine::DEFAULT_BATCH_SIZE)]
    pub batch_size: usize,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: GraphSource,

    #[arg(long)]
    pub query: PathBuf,

    #[arg(long, default_value = "hybrid", value_parser = parse_design)]
    pub design: Design,

    #[command(flatten)]
    pub design_args: DesignArgs,

    /// Workers per node.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub workers: u32,

    #[arg(long, default_value = "off", value_parser = parse_switch, action = clap::ArgAction::Set)]
    pub redundancy: bool,

    /// Also run the brute-force oracle and compare; exit 2 on mismatch.
    #[arg(long)]
    pub oracle: bool,

    /// Results TSV, one match per line in variable order.
    #[arg(long)]
    pub results: Option<PathBuf>,

    /// Metrics CSV (`metric,op_index,worker,value`).
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Hash,
    Kway,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    #[command(flatten)]
    pub source: GraphSource,

    #[arg(long, value_enum, default_value = "kway")]
    pub strategy: Strategy,

    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    pub partitions: u32,

    #[arg(long, default_value_t = partmatch_core::partition::DEFAULT_EPSILON)]
    pub epsilon: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output file; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub source: GraphSource,

    #[arg(long)]
    pub query: PathBuf,

    #[arg(long, value_delimiter = ',', default_value = "compute,lookup-hash,lookup-kway,hybrid", value_parser = parse_design)]
    pub designs: Vec<Design>,

    #[command(flatten)]
    pub design_args: DesignArgs,

    /// Workers per node to sweep.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4", value_parser = clap::value_parser!(u32).range(1..))]
    pub sweep_workers: Vec<u32>,

    #[arg(long, value_delimiter = ',', default_value = "off,on", value_parser = parse_switch)]
    pub redundancy: Vec<bool>,

    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    pub reps: u32,

    /// Summary CSV; standard output when omitted.
    #[arg(long)]
    pub summary: Option<PathBuf>,

    /// Per-repetition metrics CSV.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub vertices: usize,

    #[arg(long)]
    pub edges: usize,

    #[arg(long, default_value_t = 1)]
    pub labels: usize,

    #[arg(long, default_value = "uniform", value_parser = parse_model)]
    pub model: SynthModel,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_design(s: &str) -> Result<Design, String> {
    s.parse().map_err(|e: partmatch_core::Error| e.to_string())
}

fn parse_semantics(s: &str) -> Result<Semantics, String> {
    s.parse().map_err(|e: partmatch_core::Error| e.to_string())
}

fn parse_model(s: &str) -> Result<SynthModel, String> {
    s.parse().map_err(|e: partmatch_core::Error| e.to_string())
}

fn parse_switch(s: &str) -> Result<bool, String> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        other => Err(format!("expected on|off, found `{other}`")),
    }
}
