use thiserror::Error;

/// Errors shared by all engines and the document layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid weight {value:?} for semiring {kind}: {reason}")]
    InvalidWeight {
        value: String,
        kind: String,
        reason: String,
    },

    #[error("cannot parse weight literal {0:?}")]
    WeightSyntax(String),

    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),

    #[error("label \"tau\" is reserved for the unobservable move")]
    ReservedLabel,

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("unknown state {0:?}")]
    UnknownState(String),

    #[error("duplicate state {0:?}")]
    DuplicateState(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("{op} requires the {expected} semiring, got {actual}")]
    WrongSemiring {
        op: &'static str,
        expected: &'static str,
        actual: String,
    },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("state bound exceeded: {states} states, oracle limit is {limit}")]
    StateBound { states: usize, limit: usize },

    #[error(
        "oracle ambiguity: accepted partitions are not closed under join on this instance ({0})"
    )]
    OracleAmbiguity(String),

    #[error("refusing to {op} on a non-exact verdict (status {status})")]
    ApproximateVerdict { op: &'static str, status: String },

    #[error("{context}: {message}")]
    Document { context: String, message: String },

    #[error("missing initial state in {0}")]
    MissingInitial(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON syntax error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Document-level validation error with a field/position context, e.g.
    /// `transitions[3].weight`.
    pub fn document(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Document {
            context: context.into(),
            message: message.into(),
        }
    }
}
