use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Evaluation point at or beyond a zero of a warping function, or outside
    /// the interior of the relevant domain.
    #[error("{what} = {at} is outside the admissible domain")]
    Domain { what: &'static str, at: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("improper integral: {0}")]
    Improper(String),

    /// State magnitude exceeded the divergence threshold. Carries the last
    /// accepted node `(r, [alpha, alpha', alpha'', alpha'''])`.
    #[error("integration diverged after r = {last_r}")]
    Divergence { last_r: f64, last_state: [f64; 4] },

    #[error("singular leading coefficient at r = {at}")]
    Singularity { at: f64 },

    #[error("no convergence after {iterations} iterations (best residual {best_residual:e})")]
    NoConvergence {
        iterations: usize,
        best_residual: f64,
        best: (f64, f64),
    },
}

impl Error {
    /// True for failures of a numerical procedure (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Divergence { .. } | Error::Singularity { .. } | Error::NoConvergence { .. }
        )
    }
}
