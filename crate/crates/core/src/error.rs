use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("epoch {epoch} out of range for a schedule of {epochs} epochs")]
    EpochOutOfRange { epoch: usize, epochs: usize },

    #[error("no unit fired before the reference time")]
    NoWinner,

    #[error("training diverged at epoch {epoch}: non-finite weight")]
    Diverged { epoch: usize },

    #[error("invariant violated: {0}")]
    InvariantViolated(String),

    #[error("{path}: not a SPHERE file")]
    NotSphere { path: PathBuf },

    #[error("{path}: unsupported SPHERE encoding: {reason}")]
    UnsupportedEncoding { path: PathBuf, reason: String },

    #[error("{path}: truncated sample data (expected {expected} bytes, found {found})")]
    Truncated {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("{path}:{line}: {reason}")]
    Malformed {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("unknown phone symbol `{0}`")]
    UnknownPhone(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by a malformed corpus file (as opposed to
    /// plain I/O failures or bad parameters).
    pub fn is_corpus_error(&self) -> bool {
        matches!(
            self,
            Error::NotSphere { .. }
                | Error::UnsupportedEncoding { .. }
                | Error::Truncated { .. }
                | Error::Malformed { .. }
                | Error::UnknownPhone(_)
        )
    }
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

pub(crate) fn check_finite(xs: &[f64], what: &'static str) -> Result<()> {
    if xs.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
