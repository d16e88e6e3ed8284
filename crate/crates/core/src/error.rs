use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("integration did not converge: estimate {estimate:e}, error bound {error_bound:e} after {evaluations} evaluations")]
    Integration {
        estimate: f64,
        error_bound: f64,
        evaluations: usize,
    },

    #[error("k = {k} exceeds the {what} cap of {cap}; {hint}")]
    Capacity {
        what: &'static str,
        k: usize,
        cap: usize,
        hint: &'static str,
    },

    #[error("rank deficiency: column(s) {} are linearly dependent on earlier columns", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("perfect fit: model {model} has zero residual sum of squares, Bayes factor undefined")]
    DegenerateFit { model: String },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    /// True for errors caused by the input data rather than by numerics.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient { .. } | Error::Data(_) | Error::Io(_) | Error::InvalidArgument(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
