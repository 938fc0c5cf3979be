use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument was outside the domain of the function.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("invalid correlation {0}: must lie in [-1, 1]")]
    InvalidCorrelation(f64),

    #[error("degenerate volatility: volatility row has no nonzero entry")]
    DegenerateVolatility,

    #[error("series in {func} did not converge after {terms} terms (partial sum {partial_sum})")]
    NonConvergence {
        func: &'static str,
        terms: usize,
        partial_sum: f64,
    },

    #[error("default correlation is undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("overflow in {func}: argument {x} is out of the supported range")]
    Overflow { func: &'static str, x: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("malformed data at row {row}: {detail}")]
    Data { row: usize, detail: String },
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }
}
