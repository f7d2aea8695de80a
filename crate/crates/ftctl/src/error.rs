use thiserror::Error;

/// Errors raised by parsing, validation and the conversions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{line}:{col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("unknown proposition `{0}`")]
    UnknownProp(String),
    #[error("unbound recursion variable `{0}`")]
    UnboundVar(String),
    #[error("alphabets differ")]
    AlphabetMismatch,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("unsupported structure: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }
}
