use std::fmt;

use thiserror::Error;

/// Evaluation strategy used by a special-function routine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    Series,
    TransformedSeries,
    Quadrature,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Strategy::Series => "series",
            Strategy::TransformedSeries => "transformed_series",
            Strategy::Quadrature => "quadrature",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole: parameter {name} = {value} is a non-positive integer")]
    Pole { name: &'static str, value: f64 },

    #[error("unsupported domain ({reason}); attempted strategies: {}", fmt_strategies(.attempted))]
    UnsupportedDomain {
        reason: String,
        attempted: Vec<Strategy>,
    },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("value overflows double precision (ln|value| = {0})")]
    Overflow(f64),

    #[error("index {index} out of range for {len} interferers")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("degenerate gamma fit: {0}")]
    DegenerateFit(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn fmt_strategies(s: &[Strategy]) -> String {
    if s.is_empty() {
        return "none".into();
    }
    s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

pub type Result<T> = std::result::Result<T, Error>;
