use thiserror::Error;

/// Errors raised by the information primitives, the solver and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A probability object failed its invariants.
    #[error("validation error: {0}")]
    Validation(String),

    /// Alphabet sizes of two composed objects disagree.
    #[error("dimension error: {what}: expected {expected}, found {found}")]
    Dimension {
        what: String,
        expected: usize,
        found: usize,
    },

    /// Solver or generator configuration is unusable.
    #[error("config error: {0}")]
    Config(String),

    /// Exhaustive enumeration would exceed the size guard.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// Layer states do not belong to the supplied encoder history.
    #[error("consistency error: {0}")]
    Consistency(String),

    /// An error raised while running a labelled scenario.
    #[error("scenario '{label}': {source}")]
    Scenario {
        label: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn dimension(what: impl Into<String>, expected: usize, found: usize) -> Self {
        Error::Dimension {
            what: what.into(),
            expected,
            found,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
