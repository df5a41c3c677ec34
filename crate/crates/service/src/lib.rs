//! REST service around the claim-checking pipeline.
//!
//! Routes (all JSON):
//!
//! - `POST /api/v1/analyze/claim`
//! - `POST /api/v1/analyze/article`
//! - `POST /api/v1/feedback`
//! - `GET  /api/v1/health`

pub mod api;
pub mod config;
pub mod error;
pub mod feedback;
mod http;
mod pipeline;

pub use config::{ConfigError, ServiceConfig};
pub use error::ServiceError;
pub use http::{router, serve, ServeError};
pub use pipeline::{load_word_vectors, Service, ServiceParts, StartupError};
