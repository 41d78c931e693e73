//! `equilab`: command-line experiments on heights, equilibrium measures,
//! periodic points, Bergman kernels and canonical bases.
//!
//! Exit codes: 0 on success (and for `--help`), 1 on usage errors, 2 when a
//! computation fails (the error name is printed on stderr).

mod commands;
mod out;
mod selftest;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "equilab", version, about = "Quantitative equidistribution experiments for polarized dynamical systems")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Canonical height of a rational point with its place decomposition.
    Height(HeightArgs),
    /// Truncated local Green's function at one place.
    Green(GreenArgs),
    /// Sample the equilibrium measure by backward iteration.
    Measure(MeasureArgs),
    /// Points of period dividing n with minimal-polynomial degrees.
    Per(PerArgs),
    /// Discrepancy of Per_n against the equilibrium integral, with a rate fit.
    Rate(RateArgs),
    /// Small-point scan over the Galois orbits of Per_n.
    Scan(ScanArgs),
    /// Bergman kernel of O(n) for the Fubini-Study or a perturbed metric.
    Bergman(BergmanArgs),
    /// Canonical basis lattice and the chi lower bound.
    Chi(ChiArgs),
    /// Run the built-in examples of every module.
    Selftest,
}

#[derive(Args)]
pub struct HeightArgs {
    #[arg(long)]
    pub map: PathBuf,
    /// Integer coordinates `a,b[,c]`.
    #[arg(long)]
    pub point: String,
    #[arg(long, default_value_t = 1e-8)]
    pub error: f64,
    /// Bad primes `p:e,...` with per-step valuation drops (required for N = 2).
    #[arg(long)]
    pub bad_primes: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct GreenArgs {
    #[arg(long)]
    pub map: PathBuf,
    /// Integer coordinates `a,b[,c]` of the lift.
    #[arg(long)]
    pub point: String,
    /// `inf` or a prime.
    #[arg(long, default_value = "inf")]
    pub place: String,
    #[arg(long, default_value_t = 20)]
    pub m: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct MeasureArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = equilab_core::measure::DEFAULT_BURN_IN)]
    pub burn_in: usize,
    #[arg(long, default_value_t = equilab_core::measure::DEFAULT_WALK_LEN)]
    pub walk_len: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Degrees {
    Certified,
    Fast,
}

#[derive(Args)]
pub struct PerArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub n: u32,
    #[arg(long, value_enum, default_value = "certified")]
    pub degrees: Degrees,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct RateArgs {
    #[arg(long)]
    pub map: PathBuf,
    /// Test-function spec, e.g. `bump:chart=0,cx=1.0,cy=0.0,inner=0.2,outer=0.4`.
    #[arg(long = "fn")]
    pub func: String,
    #[arg(long, default_value_t = 1)]
    pub nmin: u32,
    #[arg(long, default_value_t = 7)]
    pub nmax: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo samples for the reference integral (unused for monomial maps).
    #[arg(long, default_value_t = equilab_core::equid::DEFAULT_INTEGRAL_SAMPLES)]
    pub samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long = "fn")]
    pub func: String,
    #[arg(long, default_value_t = 1)]
    pub nmin: u32,
    #[arg(long, default_value_t = 5)]
    pub nmax: u32,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// The constant c_3 of the budget `h / eps + c_3 eps`.
    #[arg(long, default_value_t = 1.0)]
    pub c3: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Convention {
    /// Weight `exp(-eps f)` on every O(n).
    Unit,
    /// Weight `exp(-n eps f)` on O(n).
    Tensor,
}

#[derive(Args)]
pub struct BergmanArgs {
    #[arg(long, default_value_t = 32)]
    pub n: u32,
    /// Perturbing function; Fubini-Study when absent.
    #[arg(long = "fn")]
    pub func: Option<String>,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    #[arg(long, value_enum, default_value = "unit")]
    pub convention: Convention,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ChiArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub n: u32,
    /// Defaults to n / 2.
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long, default_value_t = 2048)]
    pub grid: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("EQUILAB_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("EQUILAB_THREADS must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion
                | clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    let res = match cli.cmd {
        Cmd::Height(a) => commands::height(&a),
        Cmd::Green(a) => commands::green(&a),
        Cmd::Measure(a) => commands::measure(&a),
        Cmd::Per(a) => commands::per(&a),
        Cmd::Rate(a) => commands::rate(&a),
        Cmd::Scan(a) => commands::scan(&a),
        Cmd::Bergman(a) => commands::bergman(&a),
        Cmd::Chi(a) => commands::chi(&a),
        Cmd::Selftest => {
            return if selftest::run() { ExitCode::SUCCESS } else { ExitCode::from(2) };
        }
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `equilab --help` for usage");
            ExitCode::from(1)
        }
        Err(commands::CliError::Compute(e)) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(2)
        }
    }
}
