use thiserror::Error;

use crate::expr::ParseError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("metric definition: {0}")]
    Metric(String),
    #[error("point outside chart domain: {0}")]
    Domain(String),
    #[error("singular metric: {0}")]
    Singular(String),
    #[error("internal consistency: {0}")]
    Consistency(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
