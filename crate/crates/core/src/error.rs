use thiserror::Error;

use crate::sim::SimTime;

/// Errors raised by the simulator and its models.
#[derive(Debug, Error)]
pub enum Error {
    #[error("causality violation: event at {fire_at} scheduled while now is {now}")]
    Causality { now: SimTime, fire_at: SimTime },

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("integrity failure on frame {frame_id}: {reason}")]
    Integrity { frame_id: u64, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed trace: {0}")]
    Trace(String),

    #[error("verification failed: {0}")]
    Verify(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 integrity or verification, 2 config, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Integrity { .. } | Error::Verify(_) => 1,
            Error::Config { .. } | Error::Parameter { .. } | Error::Causality { .. } => 2,
            Error::Io { .. } | Error::Trace(_) => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
