use thiserror::Error;

/// Errors produced by the polynomial machinery and its front-ends.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable index {0} is out of range")]
    VariableIndex(usize),

    #[error("invalid variable table: {0}")]
    VarTable(String),

    #[error("operands are defined over different variable tables")]
    VarTableMismatch,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid input: {0}")]
    Data(String),

    /// Internal inconsistency: a result failed its own verification.
    #[error("internal defect: {0}")]
    Defect(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn defect(msg: impl Into<String>) -> Self {
        Error::Defect(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
}
