use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::extract::visible_text;
use crate::text::content_tokens;

pub const DEFAULT_TOP_K: usize = 10;

const REQUEST_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub url: String,
    pub title: String,
    /// Page HTML, or plain body text for fixture entries. Empty when the
    /// backend only returned a link.
    pub raw_html: String,
    /// 1-based backend rank.
    pub rank: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendMode {
    Live,
    Fixture,
}

impl BackendMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendMode::Live => "live",
            BackendMode::Fixture => "fixture",
        }
    }
}

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("claim text is empty")]
    EmptyQuery,
    #[error("result count must be positive")]
    ZeroK,
    #[error("search backend returned status {status}: {message}")]
    Status { status: u16, message: String },
    #[error("search backend unreachable: {0}")]
    Unreachable(String),
    #[error("search backend sent an unreadable response: {0}")]
    BadResponse(String),
    #[error("no page for {0}")]
    NotFound(String),
    #[error("fixture index {path}: {source}")]
    Fixture {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("fixture manifest: {0}")]
    Manifest(String),
}

impl RetrievalError {
    /// HTTP status reported by the backend, when there was one.
    pub fn backend_status(&self) -> Option<u16> {
        match self {
            RetrievalError::Status { status, .. } => Some(*status),
            _ => None,
        }
    }
}

/// A source of ranked web pages for a query.
pub trait SearchBackend: Send + Sync {
    fn mode(&self) -> BackendMode;

    /// Up to `k` results in backend rank order. The query is used verbatim.
    fn search(&self, query: &str, k: usize) -> Result<Vec<SearchResult>, RetrievalError>;

    /// Raw page body for `url`.
    fn fetch(&self, url: &str) -> Result<String, RetrievalError>;
}

/// Runs `backend` for `claim_text` without adding quotes, keeps at most
/// `k` results and renumbers ranks from 1.
pub fn search(backend: &dyn SearchBackend, claim_text: &str, k: usize) -> Result<Vec<SearchResult>, RetrievalError> {
    if claim_text.trim().is_empty() {
        return Err(RetrievalError::EmptyQuery);
    }
    if k == 0 {
        return Err(RetrievalError::ZeroK);
    }
    let mut results = backend.search(claim_text, k)?;
    results.sort_by_key(|r| r.rank);
    results.truncate(k);
    for (i, r) in results.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    Ok(results)
}

const STOPWORDS: &[&str] = &[
    "a", "an", "the", "and", "or", "of", "to", "in", "on", "for", "by", "with", "is", "are", "was", "were", "be",
    "been", "it", "its", "this", "that", "as", "at", "from", "has", "have", "had", "not", "no", "can", "will", "he",
    "she", "they", "we", "you", "i",
];

fn keywords(text: &str) -> HashSet<String> {
    content_tokens(text)
        .into_iter()
        .filter(|t| !STOPWORDS.contains(&t.as_str()))
        .collect()
}

#[derive(Debug, Clone, Deserialize)]
struct ManifestEntry {
    url: Option<String>,
    title: Option<String>,
}

#[derive(Debug, Clone)]
struct FixtureDoc {
    filename: String,
    url: String,
    title: String,
    body: String,
    keywords: HashSet<String>,
}

/// Offline search over a directory of `.html` files.
///
/// Documents are ranked by the number of distinct non-stopword query
/// tokens they contain; ties go to the lexicographically smaller filename
/// and documents with no overlap are never returned. An optional
/// `manifest.json` maps filenames to `{ "url": .., "title": .. }`.
#[derive(Debug, Clone)]
pub struct FixtureIndex {
    docs: Vec<FixtureDoc>,
}

impl FixtureIndex {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, RetrievalError> {
        let dir = dir.as_ref();
        let io_err = |path: &Path| {
            let path = path.to_path_buf();
            move |source| RetrievalError::Fixture { path, source }
        };
        let manifest_path = dir.join("manifest.json");
        let manifest: BTreeMap<String, ManifestEntry> = if manifest_path.exists() {
            let raw = std::fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path))?;
            serde_json::from_str(&raw).map_err(|e| RetrievalError::Manifest(e.to_string()))?
        } else {
            BTreeMap::new()
        };

        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(io_err(dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "html"))
            .collect();
        files.sort();

        let mut docs = Vec::with_capacity(files.len());
        for path in files {
            let filename = path
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_default();
            let body = std::fs::read_to_string(&path).map_err(io_err(&path))?;
            let entry = manifest.get(&filename);
            let url = entry
                .and_then(|e| e.url.clone())
                .unwrap_or_else(|| format!("fixture://local/{filename}"));
            let title = entry.and_then(|e| e.title.clone()).unwrap_or_default();
            let keywords = keywords(&visible_text(&body));
            docs.push(FixtureDoc {
                filename,
                url,
                title,
                body,
                keywords,
            });
        }
        Ok(Self { docs })
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Filenames in index order.
    pub fn filenames(&self) -> impl Iterator<Item = &str> {
        self.docs.iter().map(|d| d.filename.as_str())
    }
}

impl SearchBackend for FixtureIndex {
    fn mode(&self) -> BackendMode {
        BackendMode::Fixture
    }

    fn search(&self, query: &str, k: usize) -> Result<Vec<SearchResult>, RetrievalError> {
        let wanted = keywords(query);
        let mut scored: Vec<(usize, &FixtureDoc)> = self
            .docs
            .iter()
            .map(|d| (wanted.iter().filter(|w| d.keywords.contains(*w)).count(), d))
            .filter(|(score, _)| *score > 0)
            .collect();
        scored.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.filename.cmp(&b.1.filename)));
        Ok(scored
            .into_iter()
            .take(k)
            .enumerate()
            .map(|(i, (_, d))| SearchResult {
                url: d.url.clone(),
                title: d.title.clone(),
                raw_html: d.body.clone(),
                rank: i + 1,
            })
            .collect())
    }

    fn fetch(&self, url: &str) -> Result<String, RetrievalError> {
        self.docs
            .iter()
            .find(|d| d.url == url)
            .map(|d| d.body.clone())
            .ok_or_else(|| RetrievalError::NotFound(url.to_string()))
    }
}

/// JSON search API client.
///
/// Sends `GET <endpoint>?q=<query>&num=<k>&key=<api key>` and reads
/// `(url, title)` pairs from an `items` (or `results`) array whose entries
/// carry `link` or `url` plus `title`. Each request has a 10 second timeout
/// and is retried once.
#[derive(Debug, Clone)]
pub struct LiveSearch {
    endpoint: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

#[derive(Debug, Deserialize)]
struct LiveItem {
    link: Option<String>,
    url: Option<String>,
    #[serde(default)]
    title: String,
}

#[derive(Debug, Deserialize)]
struct LiveResponse {
    items: Option<Vec<LiveItem>>,
    results: Option<Vec<LiveItem>>,
}

impl LiveSearch {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(REQUEST_TIMEOUT))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            endpoint: endpoint.into(),
            api_key,
            agent,
        }
    }

    fn get_with_retry(&self, url: &str, query: &[(&str, String)]) -> Result<String, RetrievalError> {
        let mut last = None;
        for _ in 0..2 {
            match self.get_once(url, query) {
                Ok(body) => return Ok(body),
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    fn get_once(&self, url: &str, query: &[(&str, String)]) -> Result<String, RetrievalError> {
        let mut req = self.agent.get(url);
        for (k, v) in query {
            req = req.query(*k, v);
        }
        let mut resp = req.call().map_err(|e| RetrievalError::Unreachable(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| RetrievalError::BadResponse(e.to_string()))?;
        if !(200..300).contains(&status) {
            let mut message = body;
            message.truncate(200);
            return Err(RetrievalError::Status { status, message });
        }
        Ok(body)
    }
}

impl SearchBackend for LiveSearch {
    fn mode(&self) -> BackendMode {
        BackendMode::Live
    }

    fn search(&self, query: &str, k: usize) -> Result<Vec<SearchResult>, RetrievalError> {
        let mut params = vec![("q", query.to_string()), ("num", k.to_string())];
        if let Some(key) = &self.api_key {
            params.push(("key", key.clone()));
        }
        let body = self.get_with_retry(&self.endpoint, &params)?;
        let parsed: LiveResponse =
            serde_json::from_str(&body).map_err(|e| RetrievalError::BadResponse(e.to_string()))?;
        let items = parsed.items.or(parsed.results).unwrap_or_default();
        Ok(items
            .into_iter()
            .filter_map(|item| {
                let url = item.link.or(item.url)?;
                (!url.is_empty()).then_some((url, item.title))
            })
            .take(k)
            .enumerate()
            .map(|(i, (url, title))| SearchResult {
                url,
                title,
                raw_html: String::new(),
                rank: i + 1,
            })
            .collect())
    }

    fn fetch(&self, url: &str) -> Result<String, RetrievalError> {
        self.get_with_retry(url, &[])
    }
}
