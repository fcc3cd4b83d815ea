use thiserror::Error;

/// Errors raised by the arithmetic kernels and the experiment operations built on them.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("descriptor mismatch: {0} vs {1}")]
    DescriptorMismatch(String, String),
    #[error("enumeration cap exceeded: {size} > {cap}")]
    CapExceeded { size: u128, cap: u64 },
    #[error("{0} is not a p-th power")]
    NotAPthPower(String),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("expansion depth {depth} insufficient, need more than {needed}")]
    DepthInsufficient { depth: usize, needed: usize },
    #[error("multiplicative character evaluated at zero")]
    ZeroArgument,
    #[error("cyclotomic order {0} exceeds the configured cap")]
    OrderOverflow(u64),
    #[error("zero lies in the support")]
    ZeroInSupport,
    #[error("support is empty after dropping zero")]
    EmptyAfterDrop,
    #[error("series too short: {0} terms, need at least 3")]
    TooShort(usize),
    #[error("characteristic {p} divides {n}")]
    CharDividesN { p: u64, n: i64 },
    #[error("bad parameter a: {0}")]
    BadA(String),
    #[error("bad coefficient tuple s: {0}")]
    BadS(String),
    #[error("u vanishes at {0}")]
    ZeroU(String),
    #[error("weight {0} has part divisible by the characteristic")]
    BadWeight(i64),
    #[error("set has {0} elements, need at least 3")]
    TooSmall(usize),
    #[error("set is not closed under inversion")]
    NotInverseClosed,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
