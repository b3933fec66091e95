use std::fmt;

use thiserror::Error;

/// One violated parameter constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
    /// Hard violations are reported regardless of the strict-bounds flag.
    pub hard: bool,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {}", join(.0))]
    Validation(Vec<Violation>),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("friction lookup failed: {0}")]
    Lookup(String),

    #[error("friction mode {mode} is not available on a {kind} surface")]
    Mode { mode: String, kind: String },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("mode switch sequencing error: {0}")]
    Sequencing(String),

    #[error("kinematic error: {0}")]
    Kinematic(String),

    #[error("jammed step: {0}")]
    Jammed(Box<crate::sim::StepDiagnostics>),

    #[error("degenerate contact configuration: {0}")]
    Degenerate(String),

    #[error("plan error: {0}")]
    Plan(String),

    #[error("{context}: {source}")]
    InPhase {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

impl Error {
    /// Strips phase annotations and returns the innermost error.
    pub fn root(&self) -> &Error {
        match self {
            Error::InPhase { source, .. } => source.root(),
            e => e,
        }
    }

    pub fn is_jam(&self) -> bool {
        matches!(self.root(), Error::Jammed(_) | Error::Degenerate(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
