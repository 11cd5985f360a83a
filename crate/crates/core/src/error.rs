use thiserror::Error;

/// Errors raised by the evidence engines and their numerical foundations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EbfError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A hypothesis region carries (numerically) zero posterior mass.
    #[error("degenerate region: {0}")]
    DegenerateRegion(String),

    /// An adaptive integral or truncated series did not reach its tolerance.
    #[error("numerical non-convergence in {context}: estimated error {estimate:e} exceeds tolerance {tolerance:e}")]
    NonConvergence {
        context: String,
        estimate: f64,
        tolerance: f64,
    },

    /// The caller broke an operation contract, e.g. mixing corrected and
    /// uncorrected marginals.
    #[error("contract violation: {0}")]
    Contract(String),

    /// The combination of family and hypothesis regions is not supported.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl EbfError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        EbfError::Domain(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        EbfError::DegenerateRegion(msg.into())
    }

    pub fn is_non_convergence(&self) -> bool {
        matches!(self, EbfError::NonConvergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, EbfError>;
