//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },

    #[error("symbol {symbol} used with {found} arguments, declared with {expected}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },

    #[error("unknown symbol {0}")]
    UnknownSymbol(String),

    #[error("duplicate declaration of {0}")]
    DuplicateDeclaration(String),

    #[error("incomplete problem: {0}")]
    MissingConstraint(String),

    #[error("unsupported construct: {0}")]
    Unsupported(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("clause is not regular: {0}")]
    NotRegular(String),

    #[error("grammar rule for {0} contains an ite node")]
    IteInGrammar(String),

    #[error("invalid support set: {0}")]
    InvalidSupport(String),

    #[error("automaton accepts no term")]
    EmptyLanguage,

    #[error("model does not fit the problem: {0}")]
    ModelMismatch(String),

    #[error("malformed candidate: {0}")]
    MalformedCandidate(String),

    #[error("automata have different alphabets")]
    AlphabetMismatch,
}
