//! Command-line front end. Every command builds its tables in memory and
//! writes them only after all computations succeed.

mod commands;
mod table;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use table::{fmt_num, Table};

use crate::error::{Error, Result};
use crate::geometry::{magnetic_phases, MagneticPhases};
use crate::hill::{HillSolver, Potential, PropagatorRegistry};

#[derive(Debug, Parser)]
#[command(
    name = "armchair",
    version,
    about = "Spectra of magnetic Schrödinger operators on armchair nanotube graphs"
)]
pub struct Cli {
    /// Significant digits in numeric output.
    #[arg(long, global = true, default_value_t = 15, value_parser = clap::value_parser!(u32).range(1..=17))]
    pub precision: u32,

    /// Hill integrator: auto, exact, magnus4 or rk4.
    #[arg(long, global = true, default_value = "auto")]
    pub integrator: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Vertex and edge coordinates of a finite piece of the tube.
    Geometry(GeometryArgs),
    /// Hill discriminants on an energy grid and the Hill landmarks.
    Hill(HillArgs),
    /// Fiber Lyapunov functions of one channel.
    Lyapunov(LyapunovArgs),
    /// Band endpoints and gaps for every channel, written to a directory.
    Bands(BandsArgs),
    /// Gap table of the full operator.
    Gaps(GapsArgs),
    /// Gap edges of the full operator as the field varies.
    Sweep(SweepArgs),
    /// Coefficients of a compactly supported Dirichlet eigenfunction.
    Flatband(FlatbandArgs),
    /// Residual report of the verification suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct PotentialArg {
    /// Potential file (TOML); the zero potential if omitted.
    #[arg(long)]
    pub potential: Option<PathBuf>,
}

/// Either a field strength or an explicit phase pair.
#[derive(Debug, Clone, Args)]
pub struct FieldArgs {
    /// Field strength; the geometry fixes a1 and a2.
    #[arg(long = "B", conflicts_with_all = ["a1", "a2"], allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Phase on edges of the first kind.
    #[arg(long, requires = "a2", allow_hyphen_values = true)]
    pub a1: Option<f64>,
    /// Phase on edges of the second kind.
    #[arg(long, requires = "a1", allow_hyphen_values = true)]
    pub a2: Option<f64>,
}

impl FieldArgs {
    pub fn phases(&self, n_around: usize) -> Result<MagneticPhases> {
        match (self.a1, self.a2) {
            (Some(a1), Some(a2)) => Ok(MagneticPhases::new(a1, a2)),
            _ => magnetic_phases(self.b.unwrap_or(0.0), n_around),
        }
    }

    fn describe(&self) -> String {
        match (self.a1, self.a2) {
            (Some(a1), Some(a2)) => format!("a1={a1} a2={a2}"),
            _ => format!("B={}", self.b.unwrap_or(0.0)),
        }
    }
}

#[derive(Debug, Args)]
pub struct GeometryArgs {
    #[arg(long = "N", default_value_t = 2)]
    pub n: usize,
    #[arg(long = "B", default_value_t = 0.0, allow_hyphen_values = true)]
    pub b: f64,
    /// Cell range `lo:hi`.
    #[arg(long, default_value = "0:0")]
    pub cells: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HillArgs {
    #[command(flatten)]
    pub potential: PotentialArg,
    /// Upper end of the scan in `sqrt(lambda)`.
    #[arg(long, default_value_t = 20.0)]
    pub xmax: f64,
    #[arg(long, default_value_t = crate::hill::SCAN_DX)]
    pub dx: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LyapunovArgs {
    #[command(flatten)]
    pub potential: PotentialArg,
    #[arg(long = "N", default_value_t = 2)]
    pub n: usize,
    /// Total phase `a = a1 + a2`.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    /// Grid `lo:hi:step` in `sqrt(lambda)`.
    #[arg(long, default_value = "0:20:0.01", allow_hyphen_values = true)]
    pub xrange: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BandsArgs {
    #[command(flatten)]
    pub potential: PotentialArg,
    #[arg(long = "N", default_value_t = 2)]
    pub n: usize,
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, default_value_t = 20.0)]
    pub xmax: f64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GapsArgs {
    #[command(flatten)]
    pub potential: PotentialArg,
    #[arg(long = "N", default_value_t = 2)]
    pub n: usize,
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, default_value_t = 20.0)]
    pub xmax: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub potential: PotentialArg,
    #[arg(long = "N", default_value_t = 2)]
    pub n: usize,
    /// Field grid `lo:hi:step`.
    #[arg(long = "B", allow_hyphen_values = true)]
    pub b: String,
    #[arg(long, default_value_t = 20.0)]
    pub xmax: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FlatbandArgs {
    #[command(flatten)]
    pub potential: PotentialArg,
    #[arg(long = "N", default_value_t = 2)]
    pub n: usize,
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    /// Index of the Dirichlet eigenvalue.
    #[arg(long = "n-dirichlet", default_value_t = 1)]
    pub n_dirichlet: usize,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub nu: u8,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Suite name or `all`.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[command(flatten)]
    pub potential: PotentialArg,
    #[arg(long = "N", default_value_t = 2)]
    pub n: usize,
    #[command(flatten)]
    pub field: FieldArgs,
    /// Intervals per edge in the finite-difference oracle.
    #[arg(long = "fd-points", default_value_t = 200)]
    pub fd_points: usize,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub(crate) fn solver(cli: &Cli, arg: &PotentialArg) -> Result<HillSolver> {
    let q = match &arg.potential {
        Some(path) => Potential::load(path)?,
        None => Potential::zero(),
    };
    HillSolver::with_propagator(q, PropagatorRegistry::default().get(&cli.integrator)?)
}

pub(crate) fn potential_label(arg: &PotentialArg) -> String {
    arg.potential
        .as_ref()
        .map_or_else(|| "zero".to_string(), |p| p.display().to_string())
}

/// `lo:hi` or `lo:hi:step`.
pub(crate) fn parse_range(text: &str, parts: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = text
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidArgument(format!("cannot parse range '{text}'")))?;
    if v.len() != parts || v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "range '{text}' needs {parts} colon-separated numbers"
        )));
    }
    if v[1] < v[0] {
        return Err(Error::InvalidArgument(format!(
            "range '{text}' is decreasing"
        )));
    }
    if parts == 3 && v[2] <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "range '{text}' needs a positive step"
        )));
    }
    Ok(v)
}

/// Points `lo, lo + step, ...` up to `hi` inclusive.
pub(crate) fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::InvalidPotential(_) | Error::GeometryUndefined(_) => 2,
        _ => 1,
    }
}

fn init_threads() {
    if let Some(n) = std::env::var("ARMCHAIR_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
    {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
}

/// Runs a parsed command line; returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    init_threads();
    match commands::dispatch(cli) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn main() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                2
            } else {
                0
            }
        }
    }
}
