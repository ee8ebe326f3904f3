use thiserror::Error;

/// Errors raised by the analysis library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("symbol {symbol} out of range 1..={alphabet}")]
    SymbolOutOfRange { symbol: u32, alphabet: usize },

    #[error("invalid rational {0:?}")]
    InvalidRational(String),

    #[error("ratio {0} not in (0,1)")]
    RatioOutOfRange(String),

    #[error("invalid signed permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("an IFS needs at least two maps, got {0}")]
    TooFewMaps(usize),

    #[error("box is not invariant under map {0}")]
    NotInvariant(usize),

    #[error("cannot suggest an invariant box: map {0} has a non-identity orthogonal part")]
    NonIdentityOrthogonal(usize),

    #[error("word {0} is not in the frontier")]
    NotInFrontier(String),

    #[error("type automaton is not closed")]
    AutomatonOpen,

    #[error("inconsistent type profile for type {0}")]
    InconsistentType(usize),

    #[error("maps have unequal contraction ratios")]
    Inhomogeneous,

    #[error("moran root not found: {0}")]
    NoRoot(String),

    #[error("frontier budget of {budget} exceeded at level {depth}")]
    BudgetExceeded { budget: usize, depth: usize },

    #[error("configuration error: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("unknown builtin example {0:?}")]
    UnknownBuiltin(String),

    #[error("cache error: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code: 2 bad input, 3 invariant-box failure, 4 budget abort.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotInvariant(_) | Error::InvalidBox(_) | Error::NonIdentityOrthogonal(_) => 3,
            Error::BudgetExceeded { .. } => 4,
            Error::AutomatonOpen | Error::InconsistentType(_) | Error::Inhomogeneous | Error::NoRoot(_) => 1,
            Error::NotInFrontier(_) => 1,
            _ => 2,
        }
    }
}
