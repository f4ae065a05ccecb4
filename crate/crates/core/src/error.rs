use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("the zero vector has no primitive part")]
    ZeroVector,

    #[error("generators are linearly dependent")]
    DependentGenerators,

    #[error("source vectors do not span the lattice")]
    Underdetermined,

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("invalid fan: {0}")]
    InvalidFan(String),

    #[error("fan is not nonsingular: {0}")]
    Singular(String),

    #[error("{0} is not a cone of the fan")]
    NotACone(String),

    #[error("{0} is not a primitive collection")]
    NotPrimitive(String),

    #[error("invalid surgery: {0}")]
    Surgery(String),

    #[error("invalid polytope: {0}")]
    Polytope(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
