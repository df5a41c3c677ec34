use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use factcheck_core::retrieval::{
    extract_article, filter_snippets, retrieve_articles, Article, BackendMode, FixtureIndex, LiveSearch, SearchBackend,
    SearchResult, DEFAULT_TOP_K, SNIPPET_THRESHOLD,
};
use factcheck_core::sadhan::{extract_evidence, SadhanError, SadhanModel, Verdict};
use factcheck_core::text::{content_tokens, EmbeddingTable};
use factcheck_core::worthiness::{rank_claims, WorthinessModel};
use factcheck_core::Claim;
use thiserror::Error;

use crate::api::{
    AnalyzeArticleRequest, AnalyzeArticleResponse, AnalyzeClaimRequest, AnalyzeResponse, EvidenceItem, FeedbackAck,
    FeedbackRecord, Health, HealthStatus, ModelInfo, RankedClaim, SourceEvidence, VerdictLabel, WordWeight,
};
use crate::config::ServiceConfig;
use crate::error::ServiceError;
use crate::feedback::FeedbackLog;

#[derive(Debug, Error)]
pub enum StartupError {
    #[error("search backend: {0}")]
    Backend(#[from] factcheck_core::retrieval::RetrievalError),
    #[error("feedback log {path}: {source}")]
    FeedbackLog {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// Everything a [`Service`] is built from.
pub struct ServiceParts {
    pub backend: Arc<dyn SearchBackend>,
    pub sadhan: Option<SadhanModel>,
    pub worthiness: Option<WorthinessModel>,
    /// Table for snippet similarity; defaults to the SADHAN model's table.
    pub filter_table: Option<EmbeddingTable>,
    pub feedback_log: PathBuf,
    /// Assets that failed to load, reported by `health`.
    pub missing: Vec<String>,
}

struct Loaded<M> {
    model: M,
    id: String,
}

impl<M> Loaded<M> {
    fn new(model: M, id: String) -> Self {
        Self { model, id }
    }
}

/// The claim-checking pipeline plus feedback storage. Models and tables are
/// read-only after construction, so one instance serves concurrent
/// requests.
pub struct Service {
    backend: Arc<dyn SearchBackend>,
    sadhan: Option<Loaded<SadhanModel>>,
    worthiness: Option<Loaded<WorthinessModel>>,
    filter_table: Option<EmbeddingTable>,
    feedback: FeedbackLog,
    issued: Mutex<HashSet<String>>,
    missing: Vec<String>,
}

fn new_request_id() -> String {
    format!("{:032x}", rand::random::<u128>())
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Reads a word-vector file, taking the width from its first line.
pub fn load_word_vectors(path: &Path) -> Result<EmbeddingTable, String> {
    let open = || File::open(path).map(BufReader::new).map_err(|e| e.to_string());
    let first = open()?
        .lines()
        .map_while(Result::ok)
        .find(|l| !l.trim().is_empty())
        .ok_or("file is empty")?;
    let dim = first.split_whitespace().count().saturating_sub(1);
    EmbeddingTable::from_word_vectors(open()?, dim, 0).map_err(|e| e.to_string())
}

impl Service {
    pub fn new(parts: ServiceParts) -> Result<Self, StartupError> {
        let feedback = FeedbackLog::open(&parts.feedback_log).map_err(|source| StartupError::FeedbackLog {
            path: parts.feedback_log.clone(),
            source,
        })?;
        Ok(Self {
            backend: parts.backend,
            sadhan: parts.sadhan.map(|m| {
                let id = m.to_checkpoint().content_id();
                Loaded::new(m, id)
            }),
            worthiness: parts.worthiness.map(|m| {
                let id = m.to_checkpoint().content_id();
                Loaded::new(m, id)
            }),
            filter_table: parts.filter_table,
            feedback,
            issued: Mutex::new(HashSet::new()),
            missing: parts.missing,
        })
    }

    /// Builds the backend and loads every configured asset. Model or
    /// embedding files that are unset or fail to load leave the service
    /// running in degraded mode; the backend and feedback log must work.
    pub fn from_config(cfg: &ServiceConfig) -> Result<Self, StartupError> {
        let backend: Arc<dyn SearchBackend> = match cfg.search_backend {
            BackendMode::Fixture => Arc::new(FixtureIndex::open(&cfg.fixture_dir)?),
            BackendMode::Live => Arc::new(LiveSearch::new(
                cfg.search_endpoint.clone().unwrap_or_default(),
                cfg.search_api_key.clone(),
            )),
        };
        let mut missing = Vec::new();
        let mut load = |name: &str, path: &Option<PathBuf>, required: bool| -> Option<PathBuf> {
            match path {
                Some(p) if p.exists() => Some(p.clone()),
                Some(p) => {
                    missing.push(format!("{name}: {} not found", p.display()));
                    None
                }
                None => {
                    if required {
                        missing.push(format!("{name}: not set"));
                    }
                    None
                }
            }
        };
        let sadhan_path = load("SADHAN_CKPT", &cfg.sadhan_ckpt, true);
        let worthiness_path = load("WORTHINESS_CKPT", &cfg.worthiness_ckpt, true);
        let embeddings_path = load("EMBEDDINGS_PATH", &cfg.embeddings_path, false);

        let sadhan = sadhan_path.and_then(|p| {
            SadhanModel::load(&p)
                .map_err(|e| missing.push(format!("SADHAN_CKPT: {}: {e}", p.display())))
                .ok()
        });
        let worthiness = worthiness_path.and_then(|p| {
            WorthinessModel::load(&p)
                .map_err(|e| missing.push(format!("WORTHINESS_CKPT: {}: {e}", p.display())))
                .ok()
        });
        let filter_table = embeddings_path.and_then(|p| {
            load_word_vectors(&p)
                .map_err(|e| missing.push(format!("EMBEDDINGS_PATH: {}: {e}", p.display())))
                .ok()
        });
        for m in &missing {
            tracing::warn!("asset unavailable: {m}");
        }
        Self::new(ServiceParts {
            backend,
            sadhan,
            worthiness,
            filter_table,
            feedback_log: cfg.feedback_log.clone(),
            missing,
        })
    }

    pub fn feedback_log_path(&self) -> &Path {
        self.feedback.path()
    }

    fn model_info(&self) -> ModelInfo {
        ModelInfo {
            sadhan: self.sadhan.as_ref().map(|l| l.id.clone()),
            worthiness: self.worthiness.as_ref().map(|l| l.id.clone()),
            service_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    fn issue_id(&self) -> String {
        let id = new_request_id();
        self.issued.lock().unwrap_or_else(|e| e.into_inner()).insert(id.clone());
        id
    }

    /// search → extract → filter → classify → evidence.
    pub fn analyze_claim(&self, req: &AnalyzeClaimRequest) -> Result<AnalyzeResponse, ServiceError> {
        let text = req.claim_text.trim();
        if text.is_empty() {
            return Err(ServiceError::BadRequest("claim_text is empty".into()));
        }
        let sadhan = self
            .sadhan
            .as_ref()
            .ok_or_else(|| ServiceError::Unavailable("SADHAN model is not loaded".into()))?;
        let mut claim = Claim::new(text);
        if claim.tokens.is_empty() {
            return Err(ServiceError::BadRequest("claim_text has no words".into()));
        }
        for (kind, value) in &req.aspects {
            claim = claim.with_aspect(*kind, value.clone());
        }
        let table = self.filter_table.as_ref().unwrap_or(&sadhan.model.table);

        let batch = retrieve_articles(self.backend.as_ref(), text, DEFAULT_TOP_K)
            .map_err(|e| ServiceError::Upstream(e.to_string()))?;
        for (url, reason) in &batch.failures {
            tracing::debug!("skipped {url}: {reason}");
        }
        let sources: Vec<Source<'_>> = batch
            .articles
            .iter()
            .filter_map(|article| Source::from_snippets(&claim, article, table))
            .collect();

        let mut response = AnalyzeResponse {
            request_id: String::new(),
            claim: text.to_string(),
            verdict: VerdictLabel::Unverifiable,
            score: None,
            evidence: Vec::new(),
            aspect_scores: Default::default(),
            model: self.model_info(),
            created_at: now(),
        };
        if !sources.is_empty() {
            let docs: Vec<Vec<String>> = sources.iter().map(|s| s.texts.clone()).collect();
            match sadhan.model.predict(&claim, &docs) {
                Ok(result) => {
                    response.verdict = match result.verdict {
                        Verdict::True => VerdictLabel::True,
                        Verdict::False => VerdictLabel::False,
                    };
                    response.score = Some(result.score);
                    response.aspect_scores = result.aspect_probabilities.iter().map(|(k, p)| (*k, p[0])).collect();
                    response.evidence = result
                        .documents
                        .iter()
                        .map(|d| sources[d.index].evidence(d.probabilities[0], &d.attention))
                        .collect();
                }
                Err(SadhanError::NoEvidence) => {}
                Err(e) => return Err(ServiceError::Internal(e.to_string())),
            }
        }
        response.request_id = self.issue_id();
        Ok(response)
    }

    /// Ranks the article's sentences by check-worthiness and fact-checks
    /// the top one.
    pub fn analyze_article(&self, req: &AnalyzeArticleRequest) -> Result<AnalyzeArticleResponse, ServiceError> {
        let url = req.article_url.as_deref().map(str::trim).filter(|s| !s.is_empty());
        let text = req.article_text.as_deref().filter(|s| !s.trim().is_empty());
        if url.is_some() == text.is_some() {
            return Err(ServiceError::BadRequest(
                "give exactly one of article_url and article_text".into(),
            ));
        }
        if !(0.0..=1.0).contains(&req.claim_threshold) {
            return Err(ServiceError::BadRequest("claim_threshold must lie in [0, 1]".into()));
        }
        if req.top_k == 0 {
            return Err(ServiceError::BadRequest("top_k must be positive".into()));
        }
        let worthiness = self
            .worthiness
            .as_ref()
            .ok_or_else(|| ServiceError::Unavailable("check-worthiness model is not loaded".into()))?;

        let article = match (url, text) {
            (Some(url), _) => self.fetch_article(url)?,
            (None, Some(text)) => Article::from_text("", "", text),
            (None, None) => unreachable!("checked above"),
        };
        if article.sentences.is_empty() {
            return Err(ServiceError::Unprocessable("article has no sentences".into()));
        }
        let ranked = rank_claims(&worthiness.model, &article, req.claim_threshold, req.top_k);
        let analysis = match ranked.first() {
            Some(top) => Some(self.analyze_claim(&AnalyzeClaimRequest {
                claim_text: top.sentence.text.clone(),
                page_url: url.map(str::to_string),
                aspects: Default::default(),
            })?),
            None => None,
        };
        let claims = ranked
            .into_iter()
            .enumerate()
            .map(|(i, s)| RankedClaim {
                index: s.sentence.index,
                sentence: s.sentence.text,
                score: s.score,
                selected: i == 0,
            })
            .collect();
        Ok(AnalyzeArticleResponse {
            request_id: self.issue_id(),
            url: url.map(str::to_string),
            claims,
            analysis,
            model: self.model_info(),
            created_at: now(),
        })
    }

    fn fetch_article(&self, url: &str) -> Result<Article, ServiceError> {
        let html = self
            .backend
            .fetch(url)
            .map_err(|e| ServiceError::Unprocessable(format!("could not fetch {url}: {e}")))?;
        extract_article(&SearchResult {
            url: url.to_string(),
            title: String::new(),
            raw_html: html,
            rank: 1,
        })
        .map_err(|e| ServiceError::Unprocessable(e.to_string()))
    }

    /// Appends `rec` to the feedback log once its request id is known and
    /// the log write is durable.
    pub fn submit_feedback(&self, rec: &FeedbackRecord) -> Result<FeedbackAck, ServiceError> {
        if chrono::DateTime::parse_from_rfc3339(&rec.timestamp).is_err() {
            return Err(ServiceError::BadRequest(format!(
                "timestamp {:?} is not ISO-8601",
                rec.timestamp
            )));
        }
        let known = self
            .issued
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .contains(&rec.request_id);
        if !known {
            return Err(ServiceError::UnknownRequest(rec.request_id.clone()));
        }
        self.feedback
            .append(rec)
            .map_err(|e| ServiceError::Internal(format!("feedback log: {e}")))?;
        Ok(FeedbackAck {
            status: "recorded".into(),
            request_id: rec.request_id.clone(),
        })
    }

    pub fn health(&self) -> Health {
        let mut missing = self.missing.clone();
        if self.sadhan.is_none() && !missing.iter().any(|m| m.starts_with("SADHAN_CKPT")) {
            missing.push("SADHAN_CKPT: not loaded".into());
        }
        if self.worthiness.is_none() && !missing.iter().any(|m| m.starts_with("WORTHINESS_CKPT")) {
            missing.push("WORTHINESS_CKPT: not loaded".into());
        }
        Health {
            status: if missing.is_empty() {
                HealthStatus::Ok
            } else {
                HealthStatus::Degraded
            },
            missing,
            models: self.model_info(),
            backend: self.backend.mode(),
        }
    }
}

/// The filtered part of one article that becomes a SADHAN document.
struct Source<'a> {
    article: &'a Article,
    /// Article sentence position of each document sentence.
    positions: Vec<usize>,
    texts: Vec<String>,
}

impl<'a> Source<'a> {
    fn from_snippets(claim: &Claim, article: &'a Article, table: &EmbeddingTable) -> Option<Self> {
        let snippets = filter_snippets(claim, article, SNIPPET_THRESHOLD, table);
        if snippets.is_empty() {
            return None;
        }
        let positions: Vec<usize> = snippets.iter().flat_map(|s| s.start..=s.end).collect();
        let texts = positions.iter().map(|&p| article.sentences[p].text.clone()).collect();
        Some(Self {
            article,
            positions,
            texts,
        })
    }

    fn evidence(&self, score: f64, attention: &factcheck_core::sadhan::AttentionMap) -> SourceEvidence {
        let sentences = extract_evidence(attention, &self.texts)
            .into_iter()
            .map(|e| EvidenceItem {
                index: self.positions[e.index],
                words: content_tokens(&e.text)
                    .into_iter()
                    .zip(e.word_weights)
                    .map(|(token, weight)| WordWeight { token, weight })
                    .collect(),
                text: e.text,
                intensity: e.intensity,
            })
            .collect();
        SourceEvidence {
            url: self.article.url.clone(),
            title: self.article.title.clone(),
            domain: self.article.domain.clone(),
            snippet: self.texts.join(" "),
            score,
            sentences,
        }
    }
}
