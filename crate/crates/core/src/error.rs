use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty distribution")]
    Empty,
    #[error("atoms and probabilities differ in length ({atoms} vs {probs})")]
    LengthMismatch { atoms: usize, probs: usize },
    #[error("probability {value} at index {index} is negative or not finite")]
    BadProbability { index: usize, value: f64 },
    #[error("atom {value} at index {index} is not finite")]
    BadAtom { index: usize, value: f64 },
    #[error("total mass {total} deviates from 1 by more than {tol}")]
    MassNotOne { total: f64, tol: f64 },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("support too large: {size} atoms (limit {limit})")]
    SupportTooLarge { size: usize, limit: usize },
    #[error("atom budget exceeded: {size} atoms (budget {budget})")]
    AtomBudget { size: usize, budget: usize },
    #[error("index out of range: n = {n}, k = {k}")]
    IndexOutOfRange { n: usize, k: usize },
    #[error("quadrature did not converge: estimated error {error:e} after {intervals} intervals")]
    Quadrature { error: f64, intervals: usize },
    #[error("argument {x} outside the supported range [-{limit}, {limit}]")]
    OutOfRange { x: f64, limit: f64 },
    #[error("array family violates Feller's condition on the schedule: {0}")]
    FellerTrend(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
