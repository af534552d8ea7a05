//! Error type shared across the crate.

/// Everything that can go wrong while configuring or running a simulation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Grid construction rejected the requested dimensions.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// A constant-coefficient solve was requested with a non-invertible symbol.
    #[error("singular operator: {0}")]
    SingularOperator(String),

    /// Poisson right-hand side has a mean too large for the periodic problem.
    #[error("incompatible Poisson rhs: |mean| = {mean:.3e} exceeds {limit:.3e}")]
    IncompatibleRhs { mean: f64, limit: f64 },

    /// A scalar-equation denominator that theory guarantees positive was not.
    /// This signals an implementation bug, not a bad input.
    #[error("solvability violation at step {step}: {what} = {value:.6e} (must be > 0)")]
    Solvability {
        step: usize,
        what: &'static str,
        value: f64,
    },

    /// NaN or infinity detected in the state after a step.
    #[error("non-finite {what} at step {step}")]
    NonFinite { step: usize, what: &'static str },

    /// Configuration file or flag rejected.
    #[error("config error: {0}")]
    Config(String),

    /// Snapshot metadata and payload disagree, or the metadata is malformed.
    #[error("snapshot error: {0}")]
    Snapshot(String),

    /// Underlying file I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
