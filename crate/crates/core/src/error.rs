use thiserror::Error;

/// Errors produced across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A requested index range is not covered by the available data.
    #[error("range error: need [{need_from}, {need_to}] but window is [{have_from}, {have_to}]")]
    Range {
        need_from: i64,
        need_to: i64,
        have_from: i64,
        have_to: i64,
    },

    /// Fixed-point arithmetic no longer carries enough significant bits.
    #[error("precision exhausted at q = {q}: {detail}")]
    Precision { q: String, detail: String },

    /// An exact construction would exceed the configured precision budget.
    #[error("precision budget exceeded: {0}")]
    Budget(String),

    /// Orbit points collide (or come too close) inside the scanned horizon.
    #[error("degenerate orbit: {0}")]
    DegenerateOrbit(String),

    /// A piecewise sampling function could not be built.
    #[error("construction error: {0}")]
    Construction(String),

    /// A value that must lie in the open unit disk does not.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    /// The eigensolver did not converge.
    #[error("eigensolver failed for matrix of size {size}: {detail}")]
    Numeric { size: usize, detail: String },

    /// Something that a mathematical argument guarantees did not happen.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
