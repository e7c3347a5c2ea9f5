use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("valuation of zero undefined")]
    ValuationOfZero,

    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("precision must be at least 1")]
    ZeroPrecision,

    #[error("non-unit: {0}")]
    NonUnit(String),

    #[error("root not unique/defined: {0}")]
    RootUndefined(String),

    #[error("unsupported field F_{p}^{n}, supply polynomial")]
    UnsupportedField { p: u64, n: usize },

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("incompatible rings")]
    IncompatibleRings,

    #[error("non-unit in O_n")]
    NonUnitInOrder,

    #[error("precision failure: {0}")]
    PrecisionFailure(String),

    #[error("trivial element")]
    TrivialElement,

    #[error("element is not strict (not congruent to 1 mod S)")]
    NotStrict,

    #[error("only defined for {0}")]
    WrongParameters(String),

    #[error("splitting undefined: p divides n")]
    SplittingUndefined,

    #[error("not in S_2^1")]
    NotInS21,

    #[error("brute force out of range: {0}")]
    OutOfRange(String),

    #[error("not a valid action: {0}")]
    InvalidAction(String),

    #[error("inconsistent differential: {0}")]
    InconsistentDifferential(String),

    #[error("formula violation: {0}")]
    FormulaViolation(String),

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
