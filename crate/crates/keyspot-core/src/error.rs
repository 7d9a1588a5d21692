//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration values (zero surfaces, non-positive sizes, ...).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Pair sampling gave up after the stated number of attempts.
    #[error("no view pair found within the overlap band after {attempts} attempts")]
    SamplingExhausted { attempts: usize },

    /// No tracks visible in both views; the pair cannot supervise anything.
    #[error("empty track prior: no co-visible tracks for this pair")]
    EmptyPrior,

    /// The cross-view product (or self-supervised posterior) vanished.
    #[error("degenerate target: {0}")]
    DegenerateTarget(String),

    /// Caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Fewer correspondences than the minimal solver needs.
    #[error("insufficient matches: need at least {needed}, got {got}")]
    InsufficientMatches { needed: usize, got: usize },

    /// Training aborted on a non-finite loss.
    #[error("non-finite loss at step {step} (parameter norm {param_norm})")]
    NonFiniteLoss { step: usize, param_norm: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed on-disk artifact (bad magic, version, or layout).
    #[error("format error in {path}: {message}")]
    Format { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
