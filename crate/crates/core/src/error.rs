use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("indivisible size: n = {n} is not a multiple of split factor p = {p}")]
    IndivisibleSize { n: usize, p: usize },

    #[error("indivisible size at recursion level {level}: n = {n} is not a multiple of p = {p}")]
    IndivisibleAtLevel { level: usize, n: usize, p: usize },

    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("unknown algorithm `{name}`; available: {available}")]
    UnknownAlgorithm { name: String, available: String },

    #[error("invalid triple: {0}")]
    InvalidTriple(String),

    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },

    #[error("nothing to flatten: chain is empty")]
    EmptyChain,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("dependence cycle detected involving {0}")]
    Cycle(String),

    #[error("graph is not scheduled; run a schedule pass before emission")]
    Unscheduled,

    #[error("unsupported dialect `{0}`")]
    UnknownDialect(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }
}
