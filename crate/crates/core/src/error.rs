use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },

    #[error("invalid program: {0}")]
    Compile(String),

    #[error("invalid switch distribution for {name}: {reason}")]
    InvalidDistribution { name: String, reason: String },

    #[error("unknown switch {0}")]
    UnknownSwitch(String),

    #[error("instantiation error: {0}")]
    Instantiation(String),

    #[error("arithmetic error: {0}")]
    Arithmetic(String),

    #[error("probability {value} of rule {rule} is outside [0,1]")]
    ProbabilityOutOfRange { rule: usize, value: f64 },

    #[error("switch {name} is used with outcomes {requested} but registered with {registered}")]
    OutcomeMismatch {
        name: String,
        requested: String,
        registered: String,
    },

    #[error("derivation exceeded the depth limit of {0} transitions (suspected nontermination)")]
    DepthLimit(u64),

    #[error("enumeration exceeded the leaf limit of {0}")]
    LeafLimit(u64),

    #[error("observation `{0}` has no explanation (probability zero)")]
    ImpossibleObservation(String),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed input: syntax, compile-time validation, bad distributions.
    User,
    /// Failures while executing a valid program.
    Engine,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Syntax { .. }
            | Error::Compile(_)
            | Error::InvalidDistribution { .. }
            | Error::UnknownSwitch(_) => ErrorClass::User,
            _ => ErrorClass::Engine,
        }
    }

    pub(crate) fn syntax(line: usize, col: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            col,
            message: message.into(),
        }
    }
}
