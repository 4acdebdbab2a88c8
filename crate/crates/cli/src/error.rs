use serde::Serialize;
use serde_json::{json, Value};

use cheeger_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

/// A failure that ends a command, with the exit code it maps to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
    #[serde(skip)]
    pub exit_code: i32,
}

impl CliError {
    pub fn io(message: impl Into<String>) -> Self {
        Self {
            kind: "IoError",
            message: message.into(),
            details: None,
            exit_code: EXIT_INTERNAL,
        }
    }

    pub fn invalid(kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
            details: None,
            exit_code: EXIT_INVALID,
        }
    }

    /// Single JSON document describing the failure.
    pub fn to_json(&self) -> Value {
        json!({ "schema_version": crate::report::SCHEMA_VERSION, "error": self })
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        let (kind, details, exit_code) = match &e {
            Error::Parse(_) => ("ParseError", None, EXIT_INVALID),
            Error::NotReversible { violation, i, j } => (
                "NotReversible",
                Some(json!({ "violation": violation, "pair": [i, j] })),
                EXIT_INVALID,
            ),
            Error::NotErgodic { irreducible, period } => (
                "NotErgodic",
                Some(json!({ "irreducible": irreducible, "period": period })),
                EXIT_INVALID,
            ),
            Error::Disconnected | Error::Periodic(_) => ("NotErgodic", None, EXIT_INVALID),
            Error::TooLarge { n, max_n } => (
                "TooLarge",
                Some(json!({ "n": n, "max_exact_n": max_n, "hint": "pass --sweep-only" })),
                EXIT_INVALID,
            ),
            Error::NonSquare { .. }
            | Error::Empty
            | Error::NonFinite(..)
            | Error::NegativeEntry(..)
            | Error::ColumnSumOff(..)
            | Error::DimensionMismatch { .. }
            | Error::InvalidSpec(_)
            | Error::OutOfRange { .. } => ("ValidationError", None, EXIT_INVALID),
            _ => ("NumericalFailure", None, EXIT_INTERNAL),
        };
        Self {
            kind,
            message,
            details,
            exit_code,
        }
    }
}
