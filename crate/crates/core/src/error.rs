use std::fmt;

use thiserror::Error;

/// Which clause of the parenthesis-word rules a token sequence violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParenCondition {
    /// Prefix bracket counts must stay non-negative and end at zero.
    Unbalanced,
    /// Two letters may not be adjacent.
    AdjacentLetters,
    /// `[]` and `][` may not occur.
    EmptyOrTouchingBrackets,
    /// The whole word may not be wrapped in one bracket pair.
    FullWrap,
    /// Redundant or ambiguous bracketing (`a[b]c`, `[[b]]`, ...).
    Redundant,
}

impl ParenCondition {
    pub fn roman(self) -> &'static str {
        match self {
            ParenCondition::Unbalanced => "i",
            ParenCondition::AdjacentLetters => "ii",
            ParenCondition::EmptyOrTouchingBrackets => "iii",
            ParenCondition::FullWrap => "iv",
            ParenCondition::Redundant => "v",
        }
    }
}

impl fmt::Display for ParenCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self {
            ParenCondition::Unbalanced => "unbalanced brackets",
            ParenCondition::AdjacentLetters => "adjacent letters",
            ParenCondition::EmptyOrTouchingBrackets => "`[]` or `][`",
            ParenCondition::FullWrap => "word is fully wrapped",
            ParenCondition::Redundant => "redundant bracketing",
        };
        write!(f, "condition ({}): {what}", self.roman())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("letter x{index} is outside the alphabet x0..x{max}")]
    Alphabet { index: usize, max: usize },

    #[error("arity mismatch: word has {word} letters but tree has order {order}")]
    Arity { word: usize, order: usize },

    #[error("resource cap exceeded: {what} {requested} > {cap}")]
    Resource {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("invalid parenthesis word at token {position}: {condition}")]
    Parenthesis { condition: ParenCondition, position: usize },

    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    Shape {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("invalid signal: {0}")]
    Signal(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("malformed JSON: {0}")]
    Json(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Json(err.to_string())
    }
}

impl Error {
    pub(crate) fn parse(position: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: message.into(),
        }
    }

    /// Short machine-readable tag, used by the CLI's JSON error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Alphabet { .. } => "alphabet",
            Error::Arity { .. } => "arity",
            Error::Resource { .. } => "resource",
            Error::Parenthesis { .. } => "parenthesis",
            Error::Parse { .. } => "parse",
            Error::Domain(_) => "domain",
            Error::Shape { .. } => "shape",
            Error::Signal(_) => "signal",
            Error::Precondition(_) => "precondition",
            Error::Json(_) => "json",
            Error::Internal(_) => "internal",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
