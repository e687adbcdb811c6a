use thiserror::Error;

/// Errors raised across the crate.
///
/// The variants are grouped so that front ends can map them onto exit
/// codes: configuration problems, feasibility/capacity problems and oracle
/// assertion failures are kept distinct.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation is not available for this kind of space or process.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Coding mode incompatible with the space or process.
    #[error("mode error: {0}")]
    Mode(String),

    /// The requested rate is below the construction's feasibility floor.
    #[error("rate {rate} too small for k = {k}: floor is {floor}")]
    RateTooSmall { k: usize, rate: f64, floor: f64 },

    /// A path has more jumps than the coder can represent.
    #[error("path has {k} jumps, coder capacity is {k_max}")]
    Capacity { k: usize, k_max: usize },

    /// A bit stream could not be decoded.
    #[error("decode error at bit {offset}: {reason}")]
    Decode { offset: usize, reason: String },

    /// Exhaustive search would exceed its combinatorial budget.
    #[error("combinatorial budget exceeded: {needed} subsets > {budget}")]
    Budget { needed: u128, budget: u128 },

    /// Floating-point resolution is insufficient for the request.
    #[error("precision error: {0}")]
    Precision(String),

    /// Malformed experiment configuration or input file.
    #[error("config error: {0}")]
    Config(String),

    /// An oracle sandwich did not hold.
    #[error("oracle assertion failed: {0}")]
    Oracle(String),

    /// Violated internal invariant.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
