//! Error taxonomy shared across the crate.

use crate::training::TrainReport;

/// Crate-wide error type.
///
/// Internal invariant violations (e.g. mixing jets of different spatial
/// dimension) are programmer errors and panic via `assert!` instead of
/// surfacing here.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid user-supplied configuration (bad axis, unsupported rule order, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// API misuse detected at runtime (e.g. backward on an empty tape).
    #[error("usage error: {0}")]
    Usage(String),

    /// A numeric quantity became non-finite where finiteness is required.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Training aborted; the partial report up to the failing epoch is attached.
    #[error("training error at epoch {epoch}: {reason}")]
    Training {
        epoch: usize,
        reason: String,
        report: Box<TrainReport>,
    },

    /// Galerkin assembly produced a non-finite entry.
    #[error("assembly error: {0}")]
    Assembly(String),

    /// The subspace collapsed (e.g. an all-zero stiffness matrix).
    #[error("degenerate basis: {0}")]
    DegenerateBasis(String),

    /// Error metric could not be evaluated (zero denominator, empty grid).
    #[error("metric error: {0}")]
    Metric(String),

    /// A pipeline stage failed; wraps the underlying error with a stage label.
    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    /// Wrap an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
