use std::path::PathBuf;

use factcheck_core::retrieval::BackendMode;
use thiserror::Error;

pub const DEFAULT_BIND_ADDR: &str = "127.0.0.1:8080";
pub const DEFAULT_FIXTURE_DIR: &str = "fixtures/corpus";
pub const DEFAULT_FEEDBACK_LOG: &str = "feedback.jsonl";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("SEARCH_BACKEND must be `live` or `fixture`, got {0:?}")]
    Backend(String),
    #[error("SEARCH_BACKEND=live needs SEARCH_ENDPOINT")]
    MissingEndpoint,
}

/// Settings read from the environment.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub bind_addr: String,
    pub sadhan_ckpt: Option<PathBuf>,
    pub worthiness_ckpt: Option<PathBuf>,
    /// Word vectors for snippet filtering. The SADHAN model's table is used
    /// when unset.
    pub embeddings_path: Option<PathBuf>,
    pub search_backend: BackendMode,
    pub search_api_key: Option<String>,
    pub search_endpoint: Option<String>,
    pub fixture_dir: PathBuf,
    pub feedback_log: PathBuf,
}

impl ServiceConfig {
    pub fn from_env() -> Result<Self, ConfigError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    /// Reads settings through `get`; empty values count as unset.
    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let get = |k: &str| get(k).map(|v| v.trim().to_string()).filter(|v| !v.is_empty());
        let search_backend = match get("SEARCH_BACKEND").as_deref() {
            None | Some("fixture") => BackendMode::Fixture,
            Some("live") => BackendMode::Live,
            Some(other) => return Err(ConfigError::Backend(other.to_string())),
        };
        let search_endpoint = get("SEARCH_ENDPOINT");
        if search_backend == BackendMode::Live && search_endpoint.is_none() {
            return Err(ConfigError::MissingEndpoint);
        }
        Ok(Self {
            bind_addr: get("BIND_ADDR").unwrap_or_else(|| DEFAULT_BIND_ADDR.into()),
            sadhan_ckpt: get("SADHAN_CKPT").map(PathBuf::from),
            worthiness_ckpt: get("WORTHINESS_CKPT").map(PathBuf::from),
            embeddings_path: get("EMBEDDINGS_PATH").map(PathBuf::from),
            search_backend,
            search_api_key: get("SEARCH_API_KEY"),
            search_endpoint,
            fixture_dir: get("FIXTURE_DIR").unwrap_or_else(|| DEFAULT_FIXTURE_DIR.into()).into(),
            feedback_log: get("FEEDBACK_LOG")
                .unwrap_or_else(|| DEFAULT_FEEDBACK_LOG.into())
                .into(),
        })
    }
}
