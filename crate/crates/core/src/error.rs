use alloc::string::String;
use alloc::vec::Vec;
use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate problem: {0}")]
    Degenerate(String),

    /// The iteration limit was hit; `last` is the final iterate.
    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize, last: Vec<f64> },

    /// A fit used up every residual degree of freedom.
    #[error("saturated model: {0}")]
    Saturated(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

impl Error {
    /// Short stable identifier used in CSV output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid_config",
            Error::Degenerate(_) => "degenerate",
            Error::NoConvergence { .. } => "no_convergence",
            Error::Saturated(_) => "saturated",
            Error::Dimension(_) => "dimension",
        }
    }
}

macro_rules! bail {
    ($variant:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$variant(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
