use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied parameter violates an operation's precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("color set {0:?} is not a nonempty subset of [{1}]")]
    BadColorSet(Vec<u32>, u32),

    #[error("negative weight {weight} on set {set:?}")]
    NegativeWeight { set: Vec<u32>, weight: f64 },

    #[error("instance too large: {0}")]
    TooLarge(String),

    /// Deletion–contraction ran past its recursion budget.
    #[error("recursion budget of {0} calls exhausted")]
    BudgetExhausted(u64),

    #[error("no feasible solution: {0}")]
    NoSolution(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
