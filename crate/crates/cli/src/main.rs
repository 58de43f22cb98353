use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod format;

/// Dirichlet spectra of spherical triangles, level curves of the first
/// eigenvalue, and cone heat-kernel exponents.
#[derive(Debug, Parser)]
#[command(name = "sphectra", version, args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Write a single JSON object to stdout instead of a table.
    #[arg(long, global = true)]
    pub json: bool,
    /// Read angle arguments in degrees instead of radians.
    #[arg(long, global = true)]
    pub degrees: bool,
    /// TOML file whose keys are the long flag names.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Finest mesh size per direction; the study also solves n/2 and n/4.
    #[arg(long, global = true, default_value_t = 64)]
    pub mesh_n: usize,
    /// Mesh grading exponent. Default: 2, or 3 toward corners above π/2
    /// (level curves always use 2).
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Eigensolver residual tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extrapolated eigenvalues of a triangle or digon.
    #[command(args_override_self = true)]
    Spectrum(SpectrumArgs),
    /// Eigenvalue derivatives in (α, β) by two independent methods.
    #[command(args_override_self = true)]
    Derivative(DerivativeArgs),
    /// Trace the level curve λ₁ = c and write it as CSV.
    #[command(args_override_self = true)]
    LevelCurve(LevelCurveArgs),
    /// Cone heat kernel on a grid of times, as CSV of (t, p, tail).
    #[command(args_override_self = true)]
    HeatKernel(HeatKernelArgs),
    /// Excursion exponent and candidate exponent ladder of a cone.
    #[command(args_override_self = true)]
    Exponents(ExponentsArgs),
    /// Rationality verdicts along a traced level curve, as JSON lines.
    #[command(args_override_self = true)]
    RationalityScan(ScanArgs),
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
    /// Solve the digon of opening `beta` instead of a triangle.
    #[arg(long, conflicts_with = "alpha")]
    pub digon: bool,
    #[arg(short, long, default_value_t = 4)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct DerivativeArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
    /// 1-based index of a simple eigenvalue.
    #[arg(long, default_value_t = 1, conflicts_with = "multiplet")]
    pub index: usize,
    /// 1-based index of any eigenvalue of a multiplet; reports the branch
    /// derivatives of the whole multiplet.
    #[arg(long)]
    pub multiplet: Option<usize>,
    /// Direction (dα, dβ). Required for multiplets.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_name = "DA,DB")]
    pub direction: Option<Vec<f64>>,
    /// Step of the Feynman–Hellmann matrix differences, in radians.
    #[arg(long, default_value_t = sphectra_core::shape_derivative::DEFAULT_STEP)]
    pub h: f64,
    /// Largest relative disagreement between the methods.
    #[arg(long, default_value_t = 0.015)]
    pub agreement: f64,
    /// Also report central differences of extrapolated eigenvalues.
    #[arg(long)]
    pub finite_difference: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplingArg {
    Symmetric,
    Uniform,
}

#[derive(Debug, Args)]
pub struct LevelCurveArgs {
    /// Level value.
    #[arg(short, long, default_value_t = 12.0, allow_hyphen_values = true)]
    pub c: f64,
    /// Number of samples.
    #[arg(short = 'n', long, default_value_t = 33)]
    pub samples: usize,
    /// CSV output path; stdout when absent.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SamplingArg::Symmetric)]
    pub sampling: SamplingArg,
    /// Also fit the one-sided slopes of λ₂ and λ₃ at the symmetric point.
    #[arg(long)]
    pub split_slope: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConeKind {
    /// Planar wedge of opening `beta` (d = 2).
    Arc,
    /// Cone over the spherical triangle T(alpha, beta) (d = 3).
    Triangle,
}

#[derive(Debug, Args)]
pub struct HeatKernelArgs {
    #[arg(long, value_enum, default_value_t = ConeKind::Arc)]
    pub cone: ConeKind,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, value_delimiter = ',', required_unless_present = "verify_reflection", allow_hyphen_values = true)]
    pub x: Vec<f64>,
    #[arg(long, value_delimiter = ',', required_unless_present = "verify_reflection", allow_hyphen_values = true)]
    pub y: Vec<f64>,
    /// Times at which to evaluate.
    #[arg(short, long, value_delimiter = ',', default_value = "0.5,1,2,5,10,20")]
    pub t: Vec<f64>,
    /// Number of series terms (eigenpairs).
    #[arg(long)]
    pub terms: Option<usize>,
    /// Compare the quarter-plane series with the reflection principle.
    #[arg(long)]
    pub verify_reflection: bool,
}

#[derive(Debug, Args)]
pub struct ExponentsArgs {
    #[arg(long, value_enum, default_value_t = ConeKind::Triangle)]
    pub cone: ConeKind,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Use these eigenvalues instead of solving; the ladder is then only
    /// complete up to the bound implied by the largest one.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["alpha", "beta"])]
    pub lambda: Option<Vec<f64>>,
    /// Dimension of the cone, with `--lambda`.
    #[arg(short, long, default_value_t = 3)]
    pub d: usize,
    /// Correlation of a planar walk; reports `−π/arccos(−r) − 1`.
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<f64>,
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
    /// Eigenpairs computed for triangle cones.
    #[arg(short, long, default_value_t = 8)]
    pub k: usize,
    #[arg(long, default_value_t = 1000)]
    pub q_max: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub rational_tol: f64,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Curve CSV from `level-curve`; `-` reads stdin.
    pub curve: PathBuf,
    /// Level value; inferred from the lambda1 column when absent.
    #[arg(short, long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(short, long, default_value_t = 3)]
    pub d: usize,
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
    #[arg(long, default_value_t = 1000)]
    pub q_max: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub rational_tol: f64,
    /// JSON-lines output path; stdout when absent.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

/// Why a command stopped.
#[derive(Debug)]
pub enum Failure {
    /// Bad input; exit 2.
    Input(String),
    /// The derivative methods disagree; exit 3.
    Mismatch(String),
    /// A computation failed; exit 1.
    Compute(String),
}

impl From<sphectra_core::Error> for Failure {
    fn from(e: sphectra_core::Error) -> Self {
        use sphectra_core::Error as E;
        match e {
            E::Domain { .. }
            | E::Invalid(_)
            | E::OutsideCone
            | E::IndexOutOfRange { .. }
            | E::InsufficientEigenvalues { .. }
            | E::NotSimple { .. }
            | E::Mesh(_) => Failure::Input(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("SPHECTRA_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Input(format!("SPHECTRA_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Compute(e.to_string()))
}

fn run(args: Vec<OsString>) -> Result<(), Failure> {
    let args = config::load(args).map_err(Failure::Input)?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version go to stdout with status 0; usage errors exit 2.
            let _ = e.print();
            std::process::exit(e.exit_code());
        }
    };
    init_threads()?;
    commands::dispatch(&cli)
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Mismatch(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
