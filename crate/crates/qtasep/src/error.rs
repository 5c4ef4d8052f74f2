//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the documented domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series or product did not converge within the term budget.
    #[error("series did not converge within {max_terms} terms")]
    NonConvergence { max_terms: usize },

    /// A numeric consistency contract failed (signals an upstream bug).
    #[error("tolerance contract failed: {0}")]
    Tolerance(String),

    /// Evaluation point too close to a pole.
    #[error("pole: {0}")]
    Pole(String),

    /// Quadrature self-convergence check failed.
    #[error("quadrature self-convergence failed: {0}")]
    Quadrature(String),

    /// Integration contour constraints violated.
    #[error("contour constraint violated: {0}")]
    Contour(String),

    /// Invalid rate profile.
    #[error("rate profile error: {0}")]
    Profile(String),

    /// Total jump rate reached zero; the simulation cannot advance.
    #[error("simulation deadlock: total jump rate is zero")]
    Deadlock,

    /// The per-trajectory event budget was exhausted.
    #[error("event budget exceeded after {0} events")]
    Budget(u64),

    /// Invalid experiment or CLI configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit code for the CLI: 2 for validation problems,
    /// 3 for numeric-tolerance failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Profile(_) | Error::Contour(_) | Error::Config(_) => 2,
            Error::Tolerance(_)
            | Error::Quadrature(_)
            | Error::NonConvergence { .. }
            | Error::Pole(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
