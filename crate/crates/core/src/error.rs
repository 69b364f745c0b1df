use thiserror::Error;

/// Errors shared by every module of the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime power")]
    NotAPrimePower(u64),
    #[error("operands belong to different fields")]
    MixedFields,
    #[error("division by zero")]
    DivisionByZero,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("input too large for exact expansion: {0}")]
    SizeLimitExceeded(String),
    #[error("point does not lie on the line")]
    PointNotOnLine,
    #[error("the zero polynomial is not admissible here")]
    ZeroPolynomial,
    #[error("enumeration of {size} objects exceeds the limit {limit}")]
    EnumerationTooLarge { size: u128, limit: u128 },
    #[error("construction requires odd characteristic")]
    EvenCharacteristic,
    #[error("the set is not almost Kakeya (no line in direction {0:?})")]
    NotAlmostKakeya(Vec<u64>),
    #[error("the set is not Kakeya (no line in direction {0:?})")]
    NotKakeya(Vec<u64>),
    #[error("order parameter r={r} must be divisible by q={q}")]
    RNotDivisible { r: u64, q: u64 },
    #[error("invalid field modulus: {0}")]
    InvalidModulus(String),
    #[error("invalid line selection witness: {0}")]
    InvalidWitness(String),
    #[error("cannot parse polynomial: {0}")]
    PolynomialParse(String),
    #[error("invalid point set document: {0}")]
    InvalidDocument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
