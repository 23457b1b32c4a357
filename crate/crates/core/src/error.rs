use thiserror::Error;

/// Failures surfaced by the library. Each variant maps onto one CLI exit
/// code class (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("{0} is not an odd prime power")]
    NotPrimePower(u64),

    #[error("invalid modulus: {0}")]
    InvalidModulus(String),

    #[error("modulus is reducible over Z_{p}: divisible by {factor:?}")]
    ReducibleModulus { p: u32, factor: Vec<u32> },

    #[error("zero has no inverse")]
    ZeroInverse,

    #[error("index {index} out of range [0, {bound})")]
    OutOfRange { index: u64, bound: u64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("rank space of {requested} points exceeds budget {budget}")]
    Budget { requested: u128, budget: u64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("numerical failure: {value} is {residue:e} away from the nearest integer")]
    Numerical { value: f64, residue: f64 },

    #[error("identity violated: {check}: {witness}")]
    IdentityViolation { check: String, witness: String },

    #[error("empty set")]
    EmptySet,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// 1 for identity violations, 3 for resource budget, 2 for everything a
    /// caller can fix by changing its input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::IdentityViolation { .. } => 1,
            Error::Budget { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
