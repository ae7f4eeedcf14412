use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the simulator can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("injectivity violated: sigma_min = {sigma_min:e}, sigma_max = {sigma_max:e}")]
    Injectivity { sigma_min: f64, sigma_max: f64 },

    #[error("ill-conditioned image basis for edge ({u}, {v}): Gram condition {condition:e}")]
    Conditioning { u: usize, v: usize, condition: f64 },

    #[error("H_{step} has a {degeneracy}-fold degenerate ground space")]
    IntermediateInjectivity { step: usize, degeneracy: usize },

    #[error("H_{step} has ground energy {energy:e}, expected zero")]
    NonZeroGroundEnergy { step: usize, energy: f64 },

    #[error("consecutive targets at step {step} are orthogonal (overlap {overlap:e})")]
    OrthogonalTargets { step: usize, overlap: f64 },

    #[error("state has weight {weight:e} outside the physical image")]
    GaugeRestore { weight: f64 },

    #[error("bound violated: {0}")]
    LemmaViolation(String),

    #[error("{what} dimension {dim} exceeds the cap {cap}")]
    Capacity { what: String, dim: usize, cap: usize },

    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code: 1 verification failure, 2 invalid input, 3 capacity exceeded.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::LemmaViolation(_) => 1,
            Error::Capacity { .. } => 3,
            _ => 2,
        }
    }
}
