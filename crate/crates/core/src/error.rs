use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("design matrix is rank deficient (numerical rank {rank} < {expected})")]
    RankDeficient { rank: usize, expected: usize },

    #[error("too many outliers removed for inference: {kept} observations kept, need more than {p}")]
    TooManyOutliers { kept: usize, p: usize },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("degenerate selection event: {0}")]
    DegenerateEvent(String),

    #[error("truncation set has zero probability mass")]
    ZeroMass,

    #[error("root bracketing failed: {0}")]
    BracketFailure(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors that come from the numerics rather than from user input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::DegenerateEvent(_)
                | Error::ZeroMass
                | Error::BracketFailure(_)
                | Error::Numerical(_)
        )
    }
}
