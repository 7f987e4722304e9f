use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("outside theorem hypotheses: {0}")]
    OutsideHypotheses(String),
    #[error("no k-th root: {0}")]
    NoRoot(String),
    #[error("degenerate pair: {0}")]
    Degenerate(String),
    #[error("insufficient variables: need at least {needed}, got {got}")]
    InsufficientVariables { needed: usize, got: usize },
    #[error("invalid contraction: {0}")]
    InvalidContraction(String),
    #[error("{recipe}: hypothesis violated: {detail}")]
    Hypothesis { recipe: &'static str, detail: String },
    #[error("no witness found: {0}")]
    NotFound(String),
    #[error("internal contradiction: {detail}")]
    InternalContradiction { detail: String, log: Vec<String> },
    /// A case that the case analysis rules out was reached.
    #[error("excluded case reached: {detail}")]
    Unreachable { detail: String, log: Vec<String> },
    #[error("oracle capacity exceeded: {0}")]
    CapacityExceeded(String),
    #[error("normalisation stalled: {0}")]
    NoDescent(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("verification failed ({check}): {detail}")]
    Verification { check: &'static str, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn hypothesis<T>(recipe: &'static str, detail: impl Into<String>) -> Result<T> {
    Err(Error::Hypothesis { recipe, detail: detail.into() })
}
