use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("series orders differ ({0} vs {1})")]
    OrderMismatch(usize, usize),
    #[error("series has zero constant term")]
    ZeroConstantTerm,
    #[error("inner series of a composition must vanish at 0")]
    NonzeroInnerConstant,
    #[error("series has zero linear coefficient")]
    ZeroLinearTerm,
    #[error("result is not representable over the rationals: {0}")]
    Unrepresentable(&'static str),
    #[error("outside the admissible window: {0}")]
    OutOfWindow(String),
    #[error("point lies on a branch cut or pole: {0}")]
    OnCut(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
}

impl Error {
    /// Process exit status used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
