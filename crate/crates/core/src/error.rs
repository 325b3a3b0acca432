use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("label groups overlap on `{0}`")]
    LabelOverlap(String),

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix has a negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid instrument: {0}")]
    InvalidInstrument(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("unknown outcome `{0}`")]
    UnknownOutcome(String),

    #[error("outcome `{label}` has probability {p:e}, conditional state undefined")]
    ZeroProbabilityOutcome { label: String, p: f64 },

    #[error("dimension too small: {0}")]
    DimensionTooSmall(String),

    #[error("matrix is not an isometry (max |V^dag V - I| = {0:e})")]
    NotIsometry(f64),

    #[error("bad probability distribution: {0}")]
    BadDistribution(String),

    #[error("recovery family has no channel for outcome `{0}`")]
    MissingOutcome(String),

    #[error("identity `{name}` violated: residual {residual:e}")]
    IdentityViolated { name: String, residual: f64 },

    #[error("unknown instrument family `{0}`")]
    UnknownFamily(String),

    #[error("parameter {value} outside the domain of `{family}` ({domain})")]
    ParameterOutOfRange { family: String, value: f64, domain: String },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
