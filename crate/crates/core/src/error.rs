//! Crate-wide error type.

/// Errors surfaced by solver components.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid configuration value or combination.
    #[error("configuration error: {0}")]
    Config(String),

    /// A point or vector had the wrong length for the operation.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A point violated the region contract of an evaluator.
    #[error("point outside {region}: {detail}")]
    OutsideRegion { region: &'static str, detail: String },

    /// A residual density was zero over the whole proposal sweep.
    #[error("degenerate residual density: {0}")]
    DegenerateDensity(String),

    /// Importance sampling drew a point where the biasing density vanishes
    /// but the integrand does not.
    #[error("importance-sampling support violation: {0}")]
    SupportViolation(String),

    /// An error metric has a zero denominator on the given test set.
    #[error("undefined denominator: {0}")]
    UndefinedDenominator(&'static str),

    /// A non-finite value appeared where the contract requires finite ones.
    #[error("non-finite value in {context}: {detail}")]
    NonFinite { context: &'static str, detail: String },

    /// Malformed or incompatible checkpoint file.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
