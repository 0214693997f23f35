use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("level {level} needs {positions} positions, over the budget of {budget}")]
    LevelCap {
        level: u32,
        positions: u128,
        budget: u128,
    },

    #[error("exact weight arithmetic overflows at level {0}")]
    WeightOverflow(u32),

    #[error("distribution is not uniform: weight at position {0} times m^n is not an integer")]
    NonUniform(usize),

    #[error("precision unreachable: {0}")]
    PrecisionUnreachable(String),

    #[error("division by an interval that contains zero")]
    DivisionByZero,

    #[error("power series: {0}")]
    Series(String),
}

pub type Result<T> = std::result::Result<T, Error>;
