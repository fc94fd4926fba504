use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// A single failed modelling assumption, named the way reports list it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// 1-based equation index, or `None` for problem-wide checks.
    pub equation: Option<usize>,
    pub assumption: String,
    pub detail: String,
}

impl Violation {
    pub fn new(equation: Option<usize>, assumption: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            equation,
            assumption: assumption.into(),
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.equation {
            Some(i) => write!(f, "equation {i}: {} ({})", self.assumption, self.detail),
            None => write!(f, "{} ({})", self.assumption, self.detail),
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error("quadrature on [{lo}, {hi}] did not reach tolerance: best estimate {value} with error {error}")]
    Quadrature {
        lo: f64,
        hi: f64,
        value: f64,
        error: f64,
    },

    #[error("kernel slice {functional}[k(., s)] is negative at s = {s} (value {value})")]
    NegativeKernelSlice {
        functional: String,
        s: f64,
        value: f64,
    },

    #[error("assumptions violated: {}", join_violations(.0))]
    Validation(Vec<Violation>),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },

    #[error("syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },
}

impl Error {
    /// Names of the violated assumptions, if this is a validation error.
    pub fn violated_assumptions(&self) -> Vec<&str> {
        match self {
            Error::Validation(v) => v.iter().map(|x| x.assumption.as_str()).collect(),
            _ => Vec::new(),
        }
    }

    /// Attaches an equation index to validation violations that lack one.
    pub fn for_equation(self, i: usize) -> Self {
        match self {
            Error::Validation(v) => Error::Validation(
                v.into_iter()
                    .map(|mut x| {
                        x.equation.get_or_insert(i);
                        x
                    })
                    .collect(),
            ),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
