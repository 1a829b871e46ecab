use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Float-mode reserves collapsed to zero or stopped being finite.
    #[error("reserves left the representable range: {0}")]
    Overflow(String),

    #[error("transaction {index}: {source}")]
    AtStep {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("initial state is not centered: r(x0) = {rate}, expected p_x/p_y = {target}")]
    NotCentered { rate: String, target: String },

    #[error("{0} is irrational, exact mode needs it to be rational")]
    Irrational(String),

    #[error("the fee-free solver needs fee = 0 (got {0}); use brute_force_optimal for fee-bearing instances")]
    NonZeroFee(String),

    #[error("instance has {n} user transactions, the search limit is {max}")]
    TooLarge { n: usize, max: usize },

    #[error("cannot parse {input:?}: {reason}")]
    Parse { input: String, reason: String },

    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn at_step(self, index: usize) -> Self {
        Error::AtStep {
            index,
            source: Box::new(self),
        }
    }

    /// Strips any `AtStep` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            other => other,
        }
    }
}
