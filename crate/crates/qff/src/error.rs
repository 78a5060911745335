use std::path::{Path, PathBuf};

/// Errors from file handling and command orchestration. Library errors pass
/// through unchanged so the exit code still reflects their kind.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] qff_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    /// Malformed input file; `line` is 1-based.
    #[error("{source_name}:{line}: {message}")]
    Parse { source_name: String, line: usize, message: String },
    /// Structurally valid text whose contents do not form a usable file
    /// (wrong version, missing sections, inconsistent sizes).
    #[error("{source_name}: {message}")]
    Format { source_name: String, message: String },
    #[error("invalid argument: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const IO: u8 = 1;
    pub const ARGUMENT: u8 = 2;
    pub const DATA: u8 = 3;
    pub const NUMERICAL: u8 = 4;
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> u8 {
        use qff_core::Error as C;
        match self {
            Error::Core(C::Argument(_) | C::Capacity(_) | C::Search(_)) | Error::Usage(_) => exit::ARGUMENT,
            Error::Core(C::Data(_) | C::DegenerateGeometry(_) | C::DegenerateScaler(_))
            | Error::Parse { .. }
            | Error::Format { .. } => exit::DATA,
            Error::Core(C::Numerical(_)) => exit::NUMERICAL,
            Error::Io { .. } => exit::IO,
        }
    }
}

macro_rules! usage {
    ($($arg:tt)*) => {
        return Err($crate::error::Error::Usage(format!($($arg)*)))
    };
}
pub(crate) use usage;

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
