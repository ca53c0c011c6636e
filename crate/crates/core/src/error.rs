use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    Convergence { sweeps: usize, residual: f64 },

    #[error("rank error: requested {requested} components but at most {available} are available")]
    Rank { requested: usize, available: usize },

    #[error("degenerate quantity: {0}")]
    Degenerate(String),

    #[error("matrix is not positive definite (minimum eigenvalue {min_eigenvalue:e})")]
    Conditioning { min_eigenvalue: f64 },

    #[error("spikes {first} and {second} are not separated")]
    Separation { first: usize, second: usize },

    #[error("kurtosis must exceed 1, got {0}")]
    Kurtosis(f64),

    #[error("shrinkage denominator p - m - pm/T = {denominator} is not positive")]
    Regime { denominator: f64 },

    #[error("false discovery proportion is undefined when R(t) = 0")]
    UndefinedFdp,

    #[error("loading row {row} has squared norm {norm_sq} >= 1")]
    LoadingBound { row: usize, norm_sq: f64 },

    #[error("argument outside its domain: {0}")]
    Domain(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
