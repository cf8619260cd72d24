use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("orbit reached the boundary at step {step}: {reason}")]
    BoundaryOrbit { step: usize, reason: String },

    #[error("point {0} lies outside the fundamental domain (coordinate sum exceeds 1)")]
    OutOfFundamentalDomain(String),

    #[error("no sampling value for cylinder word {0}")]
    IncompleteSampling(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("degenerate sampling: {0}")]
    DegenerateSampling(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
