//! `qkp-tn`: reproducible QKP, DMRG and annealing experiments.

mod commands;
mod output;
mod readout;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Worker-pool size for parallel gap scans and SA reads.
pub const WORKERS_ENV: &str = "QKP_TN_WORKERS";

#[derive(Parser, Debug, Serialize)]
#[command(name = "qkp-tn", version, about = "Quadratic knapsack experiments with tensor networks")]
pub struct Cli {
    /// Root seed; every random choice of the run derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory for output files and manifests.
    #[arg(long, global = true, default_value = ".")]
    #[serde(skip)]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "subcommand")]
pub enum Command {
    /// Generate a random instance.
    Gen(GenArgs),
    /// Solve an instance with one method.
    Solve(SolveArgs),
    /// Scan the two lowest annealing levels with DMRG.
    GapScan(GapScanArgs),
    /// Build an annealing schedule from a gap CSV.
    Schedule(ScheduleArgs),
    /// Evolve the annealing state vector along a schedule.
    Evolve(EvolveArgs),
    /// Check the annealing MPO against the dense Hamiltonian.
    MpoValidate(MpoValidateArgs),
    /// Tabulate solve reports for one instance.
    Compare(CompareArgs),
}

#[derive(Args, Debug, Serialize, Clone)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub capacity: u64,
    #[arg(long, default_value_t = 100)]
    pub value_max: u64,
    #[arg(long, default_value_t = 100)]
    pub weight_max: u64,
    /// Probability that a pair bonus is nonzero.
    #[arg(long, default_value_t = 0.5)]
    pub pair_density: f64,
}

#[derive(Args, Debug, Serialize, Clone)]
pub struct InstanceArgs {
    /// Instance JSON; otherwise one is generated from the flags below.
    #[arg(long, conflicts_with = "n")]
    pub instance: Option<PathBuf>,
    #[arg(long, required_unless_present = "instance")]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub capacity: u64,
    #[arg(long, default_value_t = 100)]
    pub value_max: u64,
    #[arg(long, default_value_t = 100)]
    pub weight_max: u64,
    #[arg(long, default_value_t = 0.5)]
    pub pair_density: f64,
}

#[derive(Args, Debug, Serialize, Clone)]
pub struct EncodingArgs {
    /// Penalty strength.
    #[arg(long, default_value_t = qkp_tn::encoding::DEFAULT_LAMBDA)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = Convention::MinusHalf)]
    pub convention: Convention,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    MinusHalf,
    PlusHalf,
}

impl From<Convention> for qkp_tn::encoding::SpinConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::MinusHalf => Self::MinusHalf,
            Convention::PlusHalf => Self::PlusHalf,
        }
    }
}

#[derive(Args, Debug, Serialize, Clone)]
pub struct DmrgArgs {
    /// Bond dimension cap.
    #[arg(long, default_value_t = 16)]
    pub chi: usize,
    #[arg(long, default_value_t = 20)]
    pub sweeps: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Bf,
    Dp,
    Sa,
    Dmrg,
}

#[derive(Args, Debug, Serialize)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub method: Method,
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub encoding: EncodingArgs,
    #[command(flatten)]
    pub dmrg: DmrgArgs,
    /// SA reads.
    #[arg(long, default_value_t = 50)]
    pub reads: usize,
    /// SA sweeps per read.
    #[arg(long, default_value_t = 1000)]
    pub sa_sweeps: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct GapScanArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub encoding: EncodingArgs,
    #[command(flatten)]
    pub dmrg: DmrgArgs,
    /// Grid points on [0, 1], endpoints included.
    #[arg(long, default_value_t = 21)]
    pub steps: usize,
    /// Penalty weight for the excited state; omitted means automatic.
    #[arg(long)]
    pub w: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct ScheduleArgs {
    /// Gap CSV written by `gap-scan`.
    #[arg(long)]
    pub gaps: PathBuf,
    /// Velocity floor; omitted means 1% of the gap range.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = qkp_tn::anneal::DEFAULT_DEGREE)]
    pub degree: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub encoding: EncodingArgs,
    /// Schedule JSON; linear when omitted.
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    /// Total annealing time T.
    #[arg(long, default_value_t = 50.0)]
    pub time: f64,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct MpoValidateArgs {
    #[arg(long, default_value_t = 8)]
    pub n_max: usize,
    /// Random (h, J) draws per N.
    #[arg(long, default_value_t = 50)]
    pub draws: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct CompareArgs {
    /// Solve reports for one instance.
    #[arg(long, num_args = 1.., required = true)]
    pub reports: Vec<PathBuf>,
    /// Report the ratios are taken against.
    #[arg(long)]
    pub reference: Option<PathBuf>,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(e) = configure_workers() {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    match commands::run(&cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<commands::ValidationFailure>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn configure_workers() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .map_err(|_| anyhow::anyhow!("{WORKERS_ENV}={raw:?} is not a worker count"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}
