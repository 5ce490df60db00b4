use thiserror::Error;

/// Errors produced by every layer of the workbench.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("arity mismatch for `{symbol}`: expected {expected}, found {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown relation symbol `{0}`")]
    UnknownSymbol(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("second-order quantifier over `{symbol}` not allowed in first-order evaluation")]
    SecondOrderInFirstOrder { symbol: String },
    #[error("budget exceeded at {what}: requires {required}, budget is {budget}")]
    BudgetExceeded {
        what: String,
        required: String,
        budget: String,
    },
    #[error("quantifier over `{symbol}` has arity {arity}, above the relation-universe bound {bound}")]
    ArityExceedsBound {
        symbol: String,
        arity: usize,
        bound: usize,
    },
    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("distance to an empty vector set is undefined")]
    EmptySet,
    #[error("invalid fragment: {0}")]
    InvalidFragment(String),
    #[error("invalid ultrafilter: {0}")]
    InvalidUltrafilter(String),
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
    #[error("unknown demo `{0}`")]
    UnknownDemo(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("malformed json: {0}")]
    Json(String),
}

impl Error {
    pub(crate) fn budget(what: impl Into<String>, required: impl Into<String>, budget: u128) -> Self {
        Error::BudgetExceeded {
            what: what.into(),
            required: required.into(),
            budget: budget.to_string(),
        }
    }

    /// True for budget exhaustion, which callers report separately from wrong answers.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
