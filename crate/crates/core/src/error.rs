use thiserror::Error;

/// Errors raised by the numerical routines and the input parsers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The requested operation is not implemented for this input family.
    #[error("unsupported: {0}")]
    Capability(String),

    /// An argument lies outside the domain of the formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// A precondition on the inputs was not met.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A factorization broke down (zero pivot, loss of definiteness).
    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    /// Bisection found no sign change on the bracket.
    #[error("no sign change on [{lo}, {hi}]: endpoint values {f_lo:.6e}, {f_hi:.6e}")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// Bad input rather than a numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Self::Capability(_) | Self::Domain(_) | Self::Precondition(_) | Self::Parse(_) | Self::Config(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
