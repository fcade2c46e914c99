use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("model is invalid ({} violation(s)): {}", .0.len(), summarize(.0))]
    Invalid(Vec<Violation>),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable `{var}` has no state `{state}`")]
    UnknownState { var: String, state: String },

    #[error("variable `{0}` is not a question")]
    NotAQuestion(String),

    #[error("variable `{0}` is not a skill")]
    NotASkill(String),

    #[error("evidence has zero probability under the model")]
    InconsistentEvidence,

    #[error(
        "vertex enumeration needs {needed} completions but the cap is {cap}; \
         use the coordinate_ascent strategy instead"
    )]
    VertexCapExceeded { needed: u128, cap: u64 },

    #[error("mode-assignment enumeration m^n = {m}^{n} exceeds the cap {cap}")]
    EnumerationCapExceeded { m: usize, n: usize, cap: u64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("linear program solver failure: {0}")]
    Solver(String),

    #[error("inconsistent input: {0}")]
    InconsistentInput(String),

    #[error("the question repository is empty")]
    EmptyRepository,

    #[error("question `{0}` is not in the repository")]
    UnknownQuestion(String),

    #[error("question `{0}` has already been answered")]
    AlreadyAnswered(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        match e.classify() {
            serde_json::error::Category::Data => Error::Schema {
                path: format!("line {} column {}", e.line(), e.column()),
                message: e.to_string(),
            },
            _ => Error::Syntax {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            },
        }
    }
}

fn summarize(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
