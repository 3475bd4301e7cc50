use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("modulus {0} is too large (must be below 2^16)")]
    ModulusTooLarge(u32),
    #[error("polynomial is not monic of degree {0}")]
    BadPolynomial(usize),
    #[error("polynomial is reducible over F_{0}")]
    Reducible(u32),
    #[error("polynomial is irreducible but not primitive (order of x is {order})")]
    NotPrimitive { order: u64 },
    #[error("field of size {0} exceeds the exact-verification bound 2^24")]
    FieldTooLarge(u64),
    #[error("no built-in primitive polynomial for q={q}, m={m}")]
    NoTableEntry { q: u32, m: usize },
    #[error("inverse of zero")]
    DivisionByZero,
    #[error("context has no extension field")]
    NoExtension,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("matrix is singular")]
    Singular,
    #[error("vectors are linearly dependent")]
    Dependent,
    #[error("tensor is not compatible with the support basis (slice ranks {ranks:?})")]
    Incompatible { ranks: Vec<usize> },
    #[error("exhaustive search over {0} elements exceeds the bound")]
    SearchTooLarge(u64),
    #[error("resampling gave up after {0} attempts: {1}")]
    ResampleExhausted(usize, String),
    #[error("content hash mismatch")]
    HashMismatch,
    #[error("io: {0}")]
    Io(String),
    #[error("format: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
