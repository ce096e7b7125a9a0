use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vertex {0} is not in the tree")]
    UnknownVertex(usize),

    /// A query needed parts of the tree that were cut off at the depth limit.
    #[error("truncation unsound: {0}")]
    TruncationUnsound(String),

    #[error("time {t} outside the window [0, {horizon}]")]
    OutOfWindow { t: f64, horizon: f64 },

    #[error("invalid dual window: s = {s} exceeds t = {t}")]
    InvalidWindow { s: f64, t: f64 },

    /// The dual walked into the boundary, so the finite tree can no longer
    /// stand in for the infinite one.
    #[error("inconclusive: dual reached the truncation boundary")]
    Inconclusive,

    #[error("population overflow: more than {cap} particles")]
    Overflow { cap: usize },

    #[error("singular base: mu = {mu} is not below degree {degree}")]
    SingularBase { mu: f64, degree: u32 },

    #[error("precision: {0}")]
    Precision(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable category.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::UnknownVertex(_) => "unknown-vertex",
            Error::TruncationUnsound(_) => "truncation-unsound",
            Error::OutOfWindow { .. } => "out-of-window",
            Error::InvalidWindow { .. } => "invalid-window",
            Error::Inconclusive => "inconclusive",
            Error::Overflow { .. } => "overflow",
            Error::SingularBase { .. } => "singular-base",
            Error::Precision(_) => "precision",
            Error::Unsupported(_) => "unsupported",
            Error::Parse { .. } => "parse",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
