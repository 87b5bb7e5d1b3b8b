use thiserror::Error;

use crate::kernel::FeasibilityViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// The computed transition triple at `index` is not a probability vector.
    #[error("transition probabilities at index {index} are infeasible: (L={left}, C={stay}, R={right})")]
    InfeasibleAt { index: i64, left: f64, stay: f64, right: f64 },

    /// Feasibility failed somewhere in a window that sampling could reach.
    #[error("kernel infeasible in reachable window: {0}")]
    InfeasibleWindow(FeasibilityViolation),

    #[error("step {requested} exceeds truncation half-width {limit}; absorbing boundary would bias moments")]
    BeyondTruncation { requested: u64, limit: u64 },

    #[error("step {0} was not recorded")]
    NotRecorded(u64),

    #[error("sample sets differ in size ({0} vs {1})")]
    SizeMismatch(usize, usize),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
