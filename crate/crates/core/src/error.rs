use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameters p={p}, q={q}: {reason}")]
    InvalidParams { p: u32, q: u32, reason: &'static str },

    #[error("digit {digit} out of range for base {base}")]
    InvalidDigit { digit: u32, base: u32 },

    #[error("modulus must be > 1, got {0}")]
    ModulusTooSmall(i64),

    #[error("{value} has no terminating expansion in base {base}")]
    NonTerminating { value: String, base: u32 },

    #[error("negative value {0} is outside the representable range")]
    NegativeValue(String),

    #[error("configuration has a nonzero left tail; its value is undefined")]
    LeftTailNonzero,

    #[error("right tail {tail} cannot be summed exactly (expected 0 or base-1)")]
    UnsupportedRightTail { tail: u32 },

    #[error("consistency violation: {0}")]
    ConsistencyViolation(String),

    #[error("triple ({u}, {c}, {v}) is not realizable by any configuration")]
    UndefinedTriple { u: u32, c: u32, v: u32 },

    #[error("work estimate {required} exceeds budget {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("window length {len} is not of the form 2n-1")]
    LengthParity { len: usize },

    #[error("predecessor set of {word} has unexpected shape {members:?}")]
    ShapeViolation { word: String, members: Vec<u32> },

    #[error("counterexample found: {0}")]
    CounterexampleFound(String),

    #[error("closed form is not integral: {0}")]
    NonIntegral(String),

    #[error("two words share a companion image: {0}")]
    CollisionFound(String),

    #[error("no digit keeps the column inside the lower digit set at step {step}")]
    NoChoiceExists { step: usize },

    #[error("graph is not transitive")]
    NotTransitive,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("word of length {len} does not fit a packed key in base {base}")]
    WordTooLong { len: usize, base: u32 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
