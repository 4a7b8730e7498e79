use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Hermitian eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("Gram matrix eigenvalue {value:e} is negative beyond the clamp tolerance")]
    NegativeEigenvalue { value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(
        "adaptive integration reached the subdivision cap of {intervals} intervals \
         (partial value {partial:e}, error estimate {err:e})"
    )]
    SubdivisionLimit { partial: f64, err: f64, intervals: usize },

    #[error("no sign change on [{lo}, {hi}] (g(lo) = {g_lo:e}, g(hi) = {g_hi:e})")]
    NoBracket { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },

    #[error("integrand returned a non-finite value at sample {index}")]
    NonFiniteSample { index: u64 },

    #[error("spectrum straddle: {0}; use regdet")]
    SpectrumStraddle(String),

    #[error("integrand has a pole on [0, 1] near t = {0}")]
    PoleOnPath(f64),

    #[error("relative eigenvalue gap {gap:e} is below the threshold {threshold:e}")]
    GapTooSmall { gap: f64, threshold: f64 },

    #[error("singular linear system")]
    Singular,

    #[error("eigenvalue computation failed: {0}")]
    Eigensolver(String),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
