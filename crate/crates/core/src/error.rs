use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Requested register or problem size is outside what the dense simulator supports.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// An argument violates an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    /// Min-max scaler fit on a column without spread.
    #[error("degenerate scaler: {0}")]
    DegenerateScaler(String),
    /// Dataset contents do not support the requested operation.
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("topology search failed: {0}")]
    Search(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;

impl Error {
    /// Same kind, message prefixed with `context`.
    pub fn context(self, context: impl core::fmt::Display) -> Self {
        let wrap = |m: String| alloc::format!("{context}: {m}");
        match self {
            Error::Capacity(m) => Error::Capacity(wrap(m)),
            Error::Argument(m) => Error::Argument(wrap(m)),
            Error::DegenerateGeometry(m) => Error::DegenerateGeometry(wrap(m)),
            Error::DegenerateScaler(m) => Error::DegenerateScaler(wrap(m)),
            Error::Data(m) => Error::Data(wrap(m)),
            Error::Numerical(m) => Error::Numerical(wrap(m)),
            Error::Search(m) => Error::Search(wrap(m)),
        }
    }
}
