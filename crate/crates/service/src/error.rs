use thiserror::Error;

/// Request failures, each tied to one HTTP status class.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ServiceError {
    #[error("{0}")]
    BadRequest(String),
    #[error("unknown request id {0}")]
    UnknownRequest(String),
    #[error("{0}")]
    Unprocessable(String),
    #[error("search backend failed: {0}")]
    Upstream(String),
    #[error("{0}")]
    Unavailable(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl ServiceError {
    pub fn status(&self) -> u16 {
        match self {
            ServiceError::BadRequest(_) => 400,
            ServiceError::UnknownRequest(_) => 404,
            ServiceError::Unprocessable(_) => 422,
            ServiceError::Upstream(_) => 502,
            ServiceError::Unavailable(_) => 503,
            ServiceError::Internal(_) => 500,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::BadRequest(_) => "bad_request",
            ServiceError::UnknownRequest(_) => "unknown_request",
            ServiceError::Unprocessable(_) => "unprocessable",
            ServiceError::Upstream(_) => "upstream",
            ServiceError::Unavailable(_) => "unavailable",
            ServiceError::Internal(_) => "internal",
        }
    }
}
