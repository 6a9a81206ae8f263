use thiserror::Error;

use crate::forest::ForestError;
use crate::models::ModelError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Error, Debug)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Exhaustive work would exceed a configured cap.
    #[error("resource cap exceeded: {0}")]
    Resource(String),

    #[error(transparent)]
    Forest(#[from] ForestError),

    #[error(transparent)]
    Model(#[from] ModelError),

    /// A decomposition certificate disagrees with direct evaluation.
    #[error(
        "certificate mismatch for psi[{delta},{delta_prime}] at params ({b},{b_prime}), x1={a1}: \
         certificate says {certified}, evaluation says {evaluated}"
    )]
    CertificateMismatch {
        delta: usize,
        delta_prime: usize,
        b: usize,
        b_prime: usize,
        a1: usize,
        certified: bool,
        evaluated: bool,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }
}
