use thiserror::Error;

/// Errors raised while reading an automaton description.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: digit {digit} out of range for base {base}")]
    DigitOutOfRange { line: usize, digit: u64, base: u32 },
    #[error("line {line}: undeclared state `{state}`")]
    UndeclaredState { line: usize, state: String },
    #[error("missing transition ({state}, {digit})")]
    MissingTransition { state: String, digit: u32 },
    #[error("missing output for state `{0}`")]
    MissingOutput(String),
    #[error("missing `{0}` declaration")]
    MissingDeclaration(&'static str),
}

/// Domain errors produced by the constructions and density algorithms.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("base mismatch: {0} vs {1}")]
    BaseMismatch(u32, u32),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("base {0} is not a prime power")]
    NotPrimePower(u64),
    #[error("squares unsupported for base {0}")]
    SquaresUnsupported(u64),
    #[error("state budget of {0} exceeded")]
    BudgetExceeded(usize),
    #[error("automaton is not primitive: {0}")]
    NotPrimitive(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("integer overflow evaluating term {0}")]
    Overflow(u64),
}

pub type Result<T> = std::result::Result<T, Error>;
