use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum HnaError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("side {side} is not of the required kind: {detail}")]
    Classification { side: usize, detail: String },

    #[error("singular configuration: {0}")]
    Singularity(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("linear solve failed (estimated condition number {cond:.3e}): {detail}")]
    Solver { cond: f64, detail: String },

    #[error("cost guard: {0}")]
    CostGuard(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, HnaError>;

impl HnaError {
    /// Process exit status associated with this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            HnaError::Config(_) | HnaError::Parse(_) | HnaError::CostGuard(_) => 2,
            HnaError::InvalidGeometry(_) | HnaError::Classification { .. } => 2,
            HnaError::Io(_) => 2,
            _ => 3,
        }
    }
}
