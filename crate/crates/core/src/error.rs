use thiserror::Error;

/// Errors raised across the library.
///
/// Checks that find a violation (an audit failure, a contractive inequality
/// that does not hold) are reported in their report types, not here. This
/// enum is reserved for malformed input and evaluation failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("non-finite coordinate {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("point {point} lies outside the domain")]
    OutsideDomain { point: String },

    #[error("invalid sampling request: {0}")]
    InvalidSampling(String),

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("no branch of map `{map}` matches point {point}")]
    Coverage { map: String, point: String },

    #[error("map `{map}` sends {point} to {image}, outside the domain")]
    SelfMapViolation { map: String, point: String, image: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("negative argument {0}")]
    NegativeArgument(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("trace did not converge")]
    NotConverged,

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("scenario parse error at line {line}, column {column}: {message}")]
    ScenarioParse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
