use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("shooting did not converge: {0}")]
    Shooting(String),

    #[error(
        "near-conjugate points: bordered determinant {bordered_det:e} (threshold {threshold:e}); \
         the endpoints violate the non-conjugacy hypothesis"
    )]
    NearConjugate { bordered_det: f64, threshold: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("ill-conditioned matching matrix (condition number {cond:e})")]
    IllConditioned { cond: f64 },

    #[error("degenerate projection: {0}")]
    DegenerateProjection(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
