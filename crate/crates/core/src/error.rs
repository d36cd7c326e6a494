use thiserror::Error;

use crate::rational::Q;

#[derive(Debug, Error)]
pub enum Error {
    #[error("capacity exceeded: {what} needs {needed}, limit is {limit}")]
    Capacity { what: String, needed: u128, limit: u128 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("no avoiding path from point {point} around radius {radius}")]
    NoPath { point: usize, radius: Q },

    #[error("degenerate schedule: {0}")]
    DegenerateSchedule(String),

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("discretization too coarse: {0}")]
    TooCoarse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn capacity(what: impl Into<String>, needed: u128, limit: u128) -> Self {
        Error::Capacity { what: what.into(), needed, limit }
    }
}
