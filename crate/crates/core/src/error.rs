use thiserror::Error;

use crate::rootfind::SolveError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("step size must be nonzero")]
    ZeroStep,

    #[error("mass matrix is not symmetric positive definite: {0}")]
    InvalidMass(String),

    #[error("solver failed in `{label}`: {source}")]
    Solve {
        label: String,
        #[source]
        source: SolveError,
    },

    #[error("boundary-value problem is singular at h = {h} (|{which}(h)| = {distance:e})")]
    SingularBvp {
        h: f64,
        which: &'static str,
        distance: f64,
    },

    #[error("invalid quadrature rule: {0}")]
    InvalidQuadrature(String),

    #[error("invalid composition: {0}")]
    InvalidComposition(String),

    #[error("unsupported Taylor order {0} (supported: 0, 1)")]
    UnsupportedOrder(usize),

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn solve(label: impl Into<String>, source: SolveError) -> Self {
        Error::Solve {
            label: label.into(),
            source,
        }
    }
}
