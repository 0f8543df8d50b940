use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module. Each variant maps onto a stable CLI
/// exit code, see [`Error::exit_code`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid alpha: {0}")]
    InvalidSpec(String),

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("not enough terms: requested {requested}, available {available}")]
    NotEnoughTerms { requested: usize, available: usize },

    #[error("continued fraction is not periodic (alpha is not a quadratic irrational)")]
    NotPeriodic,

    #[error("alpha is rational; the Hecke set is undefined")]
    RationalAlpha,

    #[error("s = 1 is a pole")]
    PoleAt1,

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("did not converge: error estimate {err:e} exceeds tolerance {tol:e}")]
    DidNotConverge { err: f64, tol: f64 },

    #[error("tolerance {tol:e} is below what the method can reach")]
    ToleranceUnreachable { tol: f64 },
}

impl Error {
    /// 2 parse, 3 precision, 4 domain, 5 convergence, 6 pole.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::InvalidSpec(_) | Error::NotEnoughTerms { .. } => 2,
            Error::PrecisionExhausted(_) => 3,
            Error::OutOfDomain(_) | Error::NotPeriodic | Error::RationalAlpha => 4,
            Error::DidNotConverge { .. } | Error::ToleranceUnreachable { .. } => 5,
            Error::PoleAt1 => 6,
        }
    }
}
