//! `specbasis`: batch front end for computing spectral basis functions,
//! comparison matrices and seed sets on triangle meshes.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spectral_basis::mesh::DistanceMetric;
use spectral_basis::{MassMode, Scheme};

use output::Format;

#[derive(Debug, Parser)]
#[command(name = "specbasis", version, about = "Spectral basis functions on triangle meshes")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Input mesh (OFF, OBJ or PLY).
    #[arg(long, global = true)]
    pub mesh: Option<PathBuf>,
    /// Stiffness weights: fem, cot or meanvalue.
    #[arg(long, global = true, default_value = "fem")]
    pub scheme: Scheme,
    /// Mass matrix: lumped or consistent.
    #[arg(long, global = true, default_value = "lumped")]
    pub mass: MassMode,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Output encodings, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub format: Vec<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute basis functions.
    Basis {
        #[command(subcommand)]
        kind: BasisCommand,
    },
    /// Pairwise comparison matrix of a set of fields.
    Metrics(MetricsArgs),
    /// Farthest-point seed selection.
    Seeds(SeedsArgs),
    /// Grow a diffusion basis until its supports cover the mesh.
    Coverage(CoverageArgs),
    /// Structural report of the mesh.
    Validate,
    /// Smallest eigenvalues of the Laplacian.
    Spectrum(SpectrumArgs),
}

#[derive(Debug, Subcommand)]
pub enum BasisCommand {
    Harmonic(SeedArgs),
    Hamiltonian(HamiltonianArgs),
    Eigen(EigenArgs),
    Diffusion(DiffusionArgs),
    Spectral(SpectralArgs),
    Green(GreenArgs),
}

/// Seed vertices, given explicitly, from a file, or by farthest-point sampling.
#[derive(Debug, Clone, Args)]
pub struct SeedArgs {
    /// Seed vertex indices (repeat or separate with commas).
    #[arg(long = "seed", value_delimiter = ',')]
    pub seeds: Vec<usize>,
    /// Text file with one vertex index per line.
    #[arg(long)]
    pub seeds_file: Option<PathBuf>,
    /// Pick this many seeds by farthest-point sampling from the curvature maximum.
    #[arg(long)]
    pub fps: Option<usize>,
    #[arg(long, default_value = "euclidean")]
    pub fps_metric: DistanceMetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodKind {
    Chebyshev,
    Truncated,
}

#[derive(Debug, Clone, Args)]
pub struct MethodArgs {
    /// Spectrum-free rational method or truncated eigen-expansion.
    #[arg(long)]
    pub method: Option<MethodKind>,
    /// Rational degree of the Chebyshev method.
    #[arg(long, default_value_t = 5)]
    pub degree: usize,
    /// Eigenpairs used by the truncated method.
    #[arg(long = "terms", default_value_t = 100)]
    pub terms: usize,
}

#[derive(Debug, Args)]
pub struct HamiltonianArgs {
    #[command(flatten)]
    pub seeds: SeedArgs,
    /// Coupling constant.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub mu: f64,
    /// Potential: `const=<v>`, `curvature`, or a `vertex_id,value` CSV path.
    #[arg(long, default_value = "const=1")]
    pub potential: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EigenMethodArg {
    Auto,
    Lanczos,
    Dense,
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    /// Number of eigenpairs.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value = "auto")]
    pub eigen_method: EigenMethodArg,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DiffusionArgs {
    /// Diffusion scale.
    #[arg(long)]
    pub t: f64,
    #[command(flatten)]
    pub seeds: SeedArgs,
    #[command(flatten)]
    pub method: MethodArgs,
}

#[derive(Debug, Args)]
pub struct SpectralArgs {
    /// Filter, e.g. `exp:t=0.1`, `rat:num=1;den=1,0,1`, `poly:k=2`, `mexican`.
    #[arg(long)]
    pub filter: String,
    #[command(flatten)]
    pub seeds: SeedArgs,
    #[command(flatten)]
    pub method: MethodArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GreenRoleArg {
    Harmonic,
    Diffusion,
    General,
}

#[derive(Debug, Args)]
pub struct GreenArgs {
    #[arg(long, default_value = "harmonic")]
    pub role: GreenRoleArg,
    /// Scale for the diffusion role.
    #[arg(long)]
    pub t: Option<f64>,
    /// Filter for the general role.
    #[arg(long)]
    pub filter: Option<String>,
    #[command(flatten)]
    pub seeds: SeedArgs,
    #[command(flatten)]
    pub method: MethodArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricKind {
    Area,
    Conformal,
    Kernel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Diffusion,
    Eigen,
    Harmonic,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    pub metric: MetricKind,
    /// Field CSVs from earlier runs; when absent, fields are generated.
    #[arg(long = "field")]
    pub fields: Vec<PathBuf>,
    /// Family of generated fields.
    #[arg(long, default_value = "diffusion")]
    pub family: Family,
    /// Diffusion scale of generated fields.
    #[arg(long, default_value_t = 1e-2)]
    pub t: f64,
    /// Number of generated eigenvectors.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[command(flatten)]
    pub seeds: SeedArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    /// Filter of the kernel metric.
    #[arg(long, default_value = "exp:t=0.1")]
    pub kernel: String,
    /// Rescale every field to [0, 1] first.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Args)]
pub struct SeedsArgs {
    #[arg(long)]
    pub k: usize,
    /// Start vertex, or `auto` for the curvature maximum.
    #[arg(long, default_value = "auto")]
    pub start: String,
    #[arg(long, default_value = "euclidean")]
    pub metric: DistanceMetric,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    /// Diffusion scale of the generated fields.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Initial farthest-point seeds.
    #[arg(long, default_value_t = spectral_basis::seeds::DEFAULT_K0)]
    pub k0: usize,
    /// Relative support threshold.
    #[arg(long, default_value_t = spectral_basis::seeds::DEFAULT_TAU)]
    pub tau: f64,
    #[command(flatten)]
    pub method: MethodArgs,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value = "auto")]
    pub eigen_method: EigenMethodArg,
    #[arg(long)]
    pub tol: Option<f64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(manifest) => {
            println!("{}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
