use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh has no triangles")]
    EmptyMesh,

    #[error("every triangle of the mesh is degenerate")]
    AllDegenerate,

    #[error("vertex {0} carries no mass (isolated or only in degenerate triangles)")]
    ZeroMass(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{method} did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("factorization failed: {0}")]
    FactorizationFailed(String),

    #[error("shifted system is nearly singular (condition estimate {condition:e})")]
    NearSingularShift { condition: f64 },

    #[error("filter is singular at s = {0}")]
    SingularEvaluation(f64),

    #[error("unsupported rational degree {0} (available: 3..=14)")]
    UnsupportedDegree(usize),

    #[error("denominator has nearly repeated roots that cannot be separated reliably")]
    RepeatedRoots,

    #[error("numerator degree {numerator} exceeds denominator degree {denominator}")]
    DegreeMismatch { numerator: usize, denominator: usize },

    #[error("filter {0} has no rational partial-fraction form; use the truncated path")]
    NoRationalForm(String),

    #[error("filter syntax error: {0}")]
    FilterSyntax(String),

    #[error("duplicate seed vertex {0}")]
    DuplicateSeeds(usize),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("operation requires a symmetric Laplacian scheme")]
    SchemeNotSymmetric,

    #[error("kernel is not B-adjoint (relative defect {defect:e})")]
    NotAdjoint { defect: f64 },

    #[error("field is identically zero")]
    ZeroField,

    #[error("generator produced a field whose support excludes its own seed {seed}")]
    NoProgress { seed: usize },
}
