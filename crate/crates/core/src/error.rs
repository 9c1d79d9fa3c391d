use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A configuration value carried an unknown, missing or mismatched unit.
    #[error("`{key}`: {reason} (got {value:?})")]
    Unit {
        key: String,
        value: String,
        reason: String,
    },

    /// A value violated a type invariant or an operation precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// The exact-binomial Engset evaluation was asked for a population it cannot represent.
    #[error("direct Engset evaluation overflows for population {population} (limit {limit}); use the recursive form")]
    Overflow { population: u32, limit: u32 },

    /// No configuration satisfies the SLA.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("config: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn unit(key: &str, value: &str, reason: impl Into<String>) -> Self {
        Error::Unit {
            key: key.to_owned(),
            value: value.to_owned(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
