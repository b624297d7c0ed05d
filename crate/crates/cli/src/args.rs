use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::values::{
    parse_axis, parse_count, parse_lengths, parse_modes, parse_non_negative_real, parse_positive_int,
    parse_positive_real, parse_sizes, parse_worker_list,
};

#[derive(Debug, Parser)]
#[command(name = "kgbench", version, about = "Klein-Gordon pseudospectral solver and scaling benchmark")]
pub struct Cli {
    /// Flat key = value file; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the solver and write the energy history.
    Solve(SolveArgs),
    /// Time the fixed workload at one worker count.
    Bench(BenchArgs),
    /// Time the fixed workload over a list of worker counts.
    Sweep(BenchArgs),
    /// Rank machines by their shortest run time.
    Rank(RankArgs),
    /// Fit the runtime model to a strong-scaling series.
    ModelFit(FitArgs),
    /// Evaluate the runtime model over a list of process counts.
    ModelEval(EvalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IcPreset {
    Zero,
    Gaussian,
    PlaneWave,
    Constant,
    Sech,
}

impl FromStr for IcPreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s.trim(), true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    /// `d2 [N ln N]³`
    Final,
    /// `2 d2 [N ln N]³`
    DoubledFft,
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s.trim(), true)
    }
}

/// Parsed `--workers` value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkerList(pub Vec<usize>);

fn worker_list(text: &str) -> Result<WorkerList, String> {
    parse_worker_list(text).map(WorkerList)
}

#[derive(Debug, Clone, Default, Args)]
pub struct ProblemArgs {
    /// Grid points per axis: `64` or `128,4,4`.
    #[arg(long, value_parser = parse_sizes)]
    pub n: Option<[usize; 3]>,
    /// Box lengths: `2pi` or `16pi,2pi,2pi`.
    #[arg(long, value_parser = parse_lengths)]
    pub length: Option<[f64; 3]>,
    #[arg(long, value_parser = parse_positive_real)]
    pub dt: Option<f64>,
    #[arg(long, value_parser = parse_positive_int)]
    pub steps: Option<u64>,
    /// Initial-condition preset.
    #[arg(long, value_enum)]
    pub ic: Option<IcPreset>,
    #[arg(long, allow_hyphen_values = true)]
    pub amplitude: Option<f64>,
    /// Gaussian width.
    #[arg(long, value_parser = parse_positive_real)]
    pub width: Option<f64>,
    /// Plane-wave mode numbers, e.g. `1,0,0`.
    #[arg(long, value_parser = parse_modes, allow_hyphen_values = true)]
    pub modes: Option<[i64; 3]>,
    /// Axis of the sech line profile.
    #[arg(long, value_parser = parse_axis)]
    pub axis: Option<usize>,
    /// Centre of the sech line profile along its axis.
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<f64>,
    /// Worker count, or a list such as `1,2,4` or `1..64:x2`.
    #[arg(long, value_parser = worker_list)]
    pub workers: Option<WorkerList>,
    /// Apply the 2/3 rule to the nonlinear term.
    #[arg(long)]
    pub dealias: bool,
    #[arg(long, value_parser = parse_positive_real)]
    pub blowup_threshold: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Record energy every this many steps; 0 disables diagnostics.
    #[arg(long, value_parser = parse_count)]
    pub diagnostics_every: Option<u64>,
    #[arg(long, value_name = "FILE")]
    pub energy_out: Option<PathBuf>,
    /// Write the final state here.
    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,
    /// Continue from a checkpoint instead of the initial condition.
    #[arg(long, value_name = "FILE")]
    pub resume: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, value_parser = parse_positive_int)]
    pub repeats: Option<u64>,
    /// Name recorded in the machine column.
    #[arg(long)]
    pub machine: Option<String>,
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Reference machines CSV merged into the bandwidth plot data.
    #[arg(long, value_name = "FILE")]
    pub machines: Option<PathBuf>,
    /// RAM bandwidth of one local socket, GB/s.
    #[arg(long, value_parser = parse_positive_real)]
    pub chip_bandwidth: Option<f64>,
    /// Cores per local node, for the bandwidth axis.
    #[arg(long, value_parser = parse_positive_int)]
    pub cores_per_node: Option<u64>,
    /// Model form recorded in the metadata.
    #[arg(long, value_enum)]
    pub variant: Option<Variant>,
}

#[derive(Debug, Clone, Args)]
pub struct RankArgs {
    /// Machines CSV.
    #[arg(value_name = "FILE")]
    pub machines: Option<PathBuf>,
    /// Also write the ranking as CSV.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Scaling records CSV, e.g. the output of `sweep`.
    #[arg(value_name = "FILE")]
    pub input: PathBuf,
    /// Grid size `N`; defaults to the records' `N` column.
    #[arg(long, value_parser = parse_positive_int)]
    pub n: Option<u64>,
    /// Machine to fit when the file holds several.
    #[arg(long)]
    pub machine: Option<String>,
    #[arg(long, value_enum)]
    pub variant: Option<Variant>,
    /// Use log₂ in the network term.
    #[arg(long)]
    pub log2: bool,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Measured-versus-model plot data.
    #[arg(long, value_name = "FILE")]
    pub overlay: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long, value_parser = parse_non_negative_real)]
    pub d1: Option<f64>,
    #[arg(long, value_parser = parse_non_negative_real)]
    pub d2: Option<f64>,
    #[arg(long, value_parser = parse_non_negative_real)]
    pub d3: Option<f64>,
    /// Per-core bandwidth.
    #[arg(long, value_parser = parse_positive_real)]
    pub bc: Option<f64>,
    /// Network latency, seconds.
    #[arg(long, value_parser = parse_non_negative_real)]
    pub ln: Option<f64>,
    /// Use the coefficients of a `model-fit` JSON instead of `--d1`..`--ln`.
    #[arg(long, value_name = "FILE")]
    pub fit: Option<PathBuf>,
    #[arg(long, value_parser = parse_positive_int)]
    pub n: Option<u64>,
    /// Process counts, e.g. `1..1024`.
    #[arg(long, value_parser = worker_list)]
    pub p: Option<WorkerList>,
    #[arg(long, value_enum)]
    pub variant: Option<Variant>,
    #[arg(long)]
    pub log2: bool,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

pub(crate) fn parse_worker_value(text: &str) -> Result<WorkerList, String> {
    worker_list(text)
}
