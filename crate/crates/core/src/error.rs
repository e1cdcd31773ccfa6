//! Crate-wide error type and exit-code mapping for the command-line tool.

use std::path::PathBuf;

use thiserror::Error;

/// Convenience alias used by every fallible operation in the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All error conditions surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical or ensemble parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Probability leaked into the edge of the momentum grid during quantum
    /// propagation; the caller should retry on a larger grid.
    #[error(
        "momentum grid overflow at kick {kick}: boundary population {population:.3e} \
         exceeds {limit:.1e} on a {grid}-point grid"
    )]
    GridOverflow {
        population: f64,
        limit: f64,
        kick: usize,
        grid: usize,
    },

    /// An interpolation argument fell outside the tabulated range; the table
    /// never extrapolates.
    #[error("{quantity} = {value} outside tabulated range [{min}, {max}]")]
    OutOfRange {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    /// A configuration file or command-line override could not be understood.
    #[error("config error: {0}")]
    Config(String),

    /// A data file exists but does not match the expected schema.
    #[error("malformed file {}: {reason}", path.display())]
    Format { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for configuration problems, 3 for
    /// numerical-guard failures, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Parameter(_) | Error::Config(_) | Error::Format { .. } => 2,
            Error::GridOverflow { .. } | Error::OutOfRange { .. } => 3,
            Error::Io(_) => 1,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
