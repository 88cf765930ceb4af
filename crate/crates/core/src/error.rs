//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// A value exceeded what f64 can represent on the natural scale.
    #[error("overflow in {op}: {msg}")]
    Overflow { op: &'static str, msg: String },

    /// Moment or expectation does not exist for the given parameters.
    #[error("moment divergence: {0}")]
    MomentDiverges(String),

    /// Iterative routine did not reach tolerance; carries the best estimate.
    #[error("{op} did not converge: best estimate {best}, error estimate {err_estimate}")]
    NonConvergence {
        op: &'static str,
        best: f64,
        err_estimate: f64,
    },

    /// Cholesky factorisation failed even after the jitter ladder.
    #[error("Cholesky failed at pivot {pivot}: diag {diag:.3e}, max jitter {max_jitter:.1e}")]
    CholeskyFailure {
        pivot: usize,
        diag: f64,
        max_jitter: f64,
    },

    /// A structural problem with inputs (shape mismatch, bad config value).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// File format problems carry enough to distinguish failure modes.
    #[error("format error in {path}: {msg}")]
    Format { path: String, msg: String },

    #[error("checksum mismatch in {path}: stored {stored:#018x}, computed {computed:#018x}")]
    ChecksumMismatch {
        path: String,
        stored: u64,
        computed: u64,
    },

    #[error("version mismatch in {path}: found {found}, expected {expected}")]
    VersionMismatch {
        path: String,
        found: u8,
        expected: u8,
    },

    #[error("truncated file {path}: needed {needed} bytes, had {had}")]
    Truncated {
        path: String,
        needed: usize,
        had: usize,
    },

    #[error("io error on {path}: {msg}")]
    Io { path: String, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            op,
            msg: msg.into(),
        }
    }

    pub fn overflow(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Overflow {
            op,
            msg: msg.into(),
        }
    }

    pub fn io(path: impl Into<String>, err: &std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            msg: err.to_string(),
        }
    }
}
