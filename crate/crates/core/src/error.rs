use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its admissible range. `field` names the offending input.
    #[error("{field}: {message}")]
    InvalidParameter { field: String, message: String },

    #[error("initial block weight must be strictly positive, got {0}")]
    NonPositiveInitialWeight(f64),

    #[error("exact mode requires discrete blocks")]
    NotDiscrete,

    #[error("exact mode requires a deterministic block sequence: {0}")]
    RandomWeights(String),

    #[error("exact enumeration capped at n = {cap}, requested n = {n}")]
    CapExceeded { n: usize, cap: usize },

    #[error("family has no closed-form moments; estimate them by Monte Carlo instead")]
    MissingMoments,

    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &str, message: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field: field.to_string(),
        message: message.into(),
    }
}
