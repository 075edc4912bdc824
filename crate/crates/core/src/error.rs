use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("undeclared atomic proposition `{0}`")]
    UndeclaredAtom(String),

    #[error("empty trace: LTLf traces must contain at least one letter")]
    EmptyWord,

    #[error("alphabet too large: {size} propositions exceeds the bound of {bound}")]
    AlphabetTooLarge { size: usize, bound: usize },

    #[error("state bound exceeded: more than {0} states")]
    StateBound(usize),

    #[error("duplicate formula name `{0}`")]
    DuplicateName(String),

    #[error("unknown formula name `{0}`")]
    UnknownName(String),

    #[error("unknown lifting semantics `{0}`")]
    UnknownSemantics(String),

    #[error("inconsistent preference: strict statement {statement} contradicted by derived cycle {cycle}")]
    Inconsistent { statement: String, cycle: String },

    #[error("relation is not a preorder: {0}")]
    NotPreorder(String),

    #[error("letter contains propositions outside the alphabet: {0}")]
    LetterOutsideAlphabet(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("improper strategy: reachable cycle {0:?} never stops")]
    ImproperStrategy(Vec<usize>),

    #[error("enumeration bounds exceeded: {0}")]
    BoundsExceeded(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
