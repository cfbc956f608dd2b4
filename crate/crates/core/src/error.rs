use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid Hilbert space: {0}")]
    InvalidSpace(String),

    #[error("site {site} is out of range for a space with {factors} factors")]
    SiteOutOfRange { site: usize, factors: usize },

    #[error("factor {site} has dimension {dim}, expected a qubit")]
    NotQubit { site: usize, dim: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("negative rate {0}")]
    NegativeRate(f64),

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("generator is not attractive: eigenvalue {re:.3e}{im:+.3e}i has non-negative real part")]
    NonAttractive { re: f64, im: f64 },

    #[error("zero eigenvalue is not semisimple (dim ker M = {kernel}, dim ker M^2 = {kernel_sq})")]
    NonSemisimpleKernel { kernel: usize, kernel_sq: usize },

    #[error("generator has no nonvanishing eigenvalues")]
    NoRelaxation,

    #[error("dissipator is not unital (|D(1)| = {0:.3e})")]
    NonUnital(f64),

    #[error("DFS block {block} out of range ({count} blocks)")]
    BlockOutOfRange { block: usize, count: usize },

    #[error("Lie closure exceeded the dimension cap {0}")]
    DimensionCap(usize),

    #[error("invalid spin quantum number 2J = {twice_j} for N = {n}")]
    InvalidSpin { twice_j: u32, n: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown model '{0}'")]
    UnknownModel(String),

    #[error("identity check failed: {label} (residual {residual:.3e})")]
    IdentityFailed { label: String, residual: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
