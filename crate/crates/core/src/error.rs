use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("bound {bound} exceeds the supported limit {limit}")]
    CapacityExceeded { bound: u64, limit: u64 },
    #[error("zero has no prime factorization")]
    ZeroInput,
    #[error("moduli {0} and {1} are not coprime")]
    NotCoprime(u64, u64),
    #[error("{0} is not invertible modulo {1}")]
    NotInvertible(u64, u64),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("bad reduction modulo {modulus} at iterate {index}")]
    BadReduction { modulus: u64, index: u64 },
    #[error("orbit too long: more than {budget} map applications modulo {modulus}")]
    OrbitTooLong { modulus: u64, budget: u64 },
    #[error("memory budget exceeded: more than {budget} stored points")]
    MemoryBudget { budget: u64 },
    #[error("enumeration budget exceeded: {size} > {budget}")]
    BudgetExceeded { size: u128, budget: u128 },
    #[error("invalid polynomial map: {0}")]
    InvalidMap(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("integral point {0} does not lie on the variety")]
    NotOnVariety(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("cache rejected: {0}")]
    CacheMismatch(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("orbit engines disagree: {0}")]
    EngineMismatch(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
