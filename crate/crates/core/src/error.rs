use thiserror::Error;

/// Errors produced by the generators, analyzers and the compiler.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("result has {size} elements, which exceeds the cap of {cap}")]
    CapExceeded { size: u128, cap: u128 },

    #[error("word has length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("constraint scope of {scope} variables exceeds the materialization cap of {cap}; emit an abstract instance instead")]
    ScopeTooLarge { scope: usize, cap: usize },

    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("circuit is cyclic at node {node}")]
    CyclicCircuit { node: usize },

    #[error("circuit has more than one sink; node {node} has no parent")]
    MultipleSinks { node: usize },

    #[error("assignment does not cover variable {var}")]
    IncompleteAssignment { var: u32 },

    #[error("AND node {node} is not decomposable")]
    NotDecomposable { node: usize },

    #[error("OR node {node} is not deterministic")]
    NotDeterministic { node: usize },

    #[error("{what} has size {size}, limit is {limit}")]
    TooLarge { what: &'static str, size: usize, limit: usize },

    #[error("compilation budget of {limit} decisions exceeded")]
    BudgetExceeded { limit: u64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
