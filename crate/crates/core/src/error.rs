use thiserror::Error;

use crate::solver::ContractionEstimate;

#[derive(Debug, Error)]
pub enum Error {
    /// Grid construction rejected (dimension, parity, size or box length).
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Mismatched array lengths, grids or trajectory meshes.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Argument outside the domain of an operation (negative heat time,
    /// Lebesgue exponent out of range, time not on the mesh, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An operation requiring a mean-zero field saw a nonzero k = 0 mode.
    #[error("zero-mode error: {0}")]
    ZeroMode(String),

    /// Analytic hypothesis of an inequality or norm violated
    /// (e.g. Besov smoothness index must be negative).
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    /// Singular integral outside its convergence range.
    #[error("divergent integral: {0}")]
    DivergentIntegral(String),

    #[error("empty trajectory")]
    EmptyTrajectory,

    /// Picard iteration detected sustained non-contraction; the data is
    /// too large for the fixed-point argument. Diagnostics attached.
    #[error(
        "smallness violated: contraction ratios stayed >= 1 \
         (eta_hat = {})",
        .0.eta_hat
    )]
    SmallnessViolated(Box<ContractionEstimate>),

    /// Time stepper produced non-finite values.
    #[error("solution blew up; last valid time {last_valid_time}")]
    BlowUp { last_valid_time: f64 },

    /// Picard iteration still contracting but tolerance not reached
    /// within the configured iteration budget.
    #[error("no convergence after {iters} iterations (last update {last_update:e})")]
    NoConvergence { iters: usize, last_update: f64 },

    /// Configuration file rejected; the message names the offending field.
    #[error("config error: {0}")]
    Config(String),

    #[error("serialization error: {0}")]
    Serialization(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
