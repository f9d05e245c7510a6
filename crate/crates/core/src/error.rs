use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the numerical routines in this crate.
///
/// Every variant names the operation that failed so the CLI can report it
/// without extra context.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("{op}: precondition violated: {msg}")]
    Precondition { op: &'static str, msg: String },

    #[error("{op}: invalid parameters: {msg}")]
    InvalidParams { op: &'static str, msg: String },

    #[error("tau policy invalid at n = {n}: {msg}")]
    TauPolicy { n: usize, msg: String },

    #[error("truncate: non-finite entry in band {band} at index {index}")]
    NonFinite { band: usize, index: usize },

    #[error("{op}: no convergence after {iterations} iterations ({} eigenvalues settled)", partial.len())]
    NoConvergence {
        op: &'static str,
        iterations: usize,
        partial: Vec<f64>,
    },

    #[error("certify: gamma = {gamma:e} <= 0 at index {index}; certificate inapplicable")]
    Inapplicable { index: usize, gamma: f64 },

    #[error("generator: vanishing diagonal gap d({})-d({index}) for band {band}", index + band)]
    DegenerateGap { band: usize, index: usize },

    #[error("{op}: internal consistency check failed: {detail}")]
    Consistency { op: &'static str, detail: String },

    #[error("{op}: hypothesis violated at index {index}: {detail}")]
    Hypothesis {
        op: &'static str,
        index: usize,
        detail: String,
    },

    #[error("fit_rate: {usable} usable points, at least {required} required")]
    TooFewPoints { usable: usize, required: usize },
}

impl Error {
    pub(crate) fn precondition(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Precondition {
            op,
            msg: msg.into(),
        }
    }

    pub(crate) fn invalid(op: &'static str, msg: impl Into<String>) -> Self {
        Error::InvalidParams {
            op,
            msg: msg.into(),
        }
    }

    /// True for errors caused by bad user input rather than numerical trouble.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Precondition { .. } | Error::InvalidParams { .. } | Error::TauPolicy { .. }
        )
    }
}
