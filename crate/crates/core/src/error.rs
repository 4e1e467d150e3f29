use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used to pick a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("block too large for exhaustive enumeration (k = {0}, limit 30)")]
    BlockTooLarge(usize),

    #[error("degenerate restricted system")]
    DegenerateSystem,

    #[error("landscape too large: {0}")]
    LandscapeTooLarge(String),

    #[error("infeasible point: {0}")]
    Infeasible(String),

    #[error("lipschitz constant is zero")]
    ZeroLipschitz,

    #[error("unknown solver `{name}` (valid: {valid})")]
    UnknownSolver { name: String, valid: String },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_) | Error::UnknownSolver { .. } | Error::Config(_) => {
                ErrorKind::Usage
            }
            Error::DimensionMismatch { .. }
            | Error::Parse { .. }
            | Error::Io(_)
            | Error::Infeasible(_)
            | Error::LandscapeTooLarge(_)
            | Error::BlockTooLarge(_) => ErrorKind::Data,
            Error::DegenerateSystem | Error::ZeroLipschitz => ErrorKind::Numerical,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
