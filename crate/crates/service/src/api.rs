//! JSON request and response bodies.

use std::collections::BTreeMap;

use factcheck_core::retrieval::BackendMode;
use factcheck_core::AspectKind;
use serde::{Deserialize, Serialize};

pub const DEFAULT_CLAIM_THRESHOLD: f64 = 0.5;
pub const DEFAULT_TOP_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeClaimRequest {
    pub claim_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub page_url: Option<String>,
    /// Known claim attributes, keyed `author`, `topic` or `domain`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub aspects: BTreeMap<AspectKind, String>,
}

impl AnalyzeClaimRequest {
    pub fn new(claim_text: impl Into<String>) -> Self {
        Self {
            claim_text: claim_text.into(),
            page_url: None,
            aspects: BTreeMap::new(),
        }
    }
}

/// Exactly one of `article_url` and `article_text` must be set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeArticleRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub article_url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub article_text: Option<String>,
    #[serde(default = "default_threshold")]
    pub claim_threshold: f64,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
}

fn default_threshold() -> f64 {
    DEFAULT_CLAIM_THRESHOLD
}

fn default_top_k() -> usize {
    DEFAULT_TOP_K
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictLabel {
    True,
    False,
    /// No evidence snippet survived filtering.
    Unverifiable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordWeight {
    pub token: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceItem {
    /// Sentence position in the source article.
    pub index: usize,
    pub text: String,
    /// Highlight strength in `[0, 1]`; 1 for the most salient sentence of
    /// the source.
    pub intensity: f64,
    pub words: Vec<WordWeight>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceEvidence {
    pub url: String,
    pub title: String,
    pub domain: String,
    /// Snippet sentences joined with spaces.
    pub snippet: String,
    /// This source's `P(true)`, averaged over aspect kinds.
    pub score: f64,
    pub sentences: Vec<EvidenceItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    /// Checkpoint content ids, absent when the model is not loaded.
    pub sadhan: Option<String>,
    pub worthiness: Option<String>,
    pub service_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeResponse {
    pub request_id: String,
    pub claim: String,
    pub verdict: VerdictLabel,
    /// `P(true)`; present iff the verdict is not `unverifiable`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    pub evidence: Vec<SourceEvidence>,
    /// `P(true)` of each aspect kind's sub-model, averaged over sources.
    #[serde(default)]
    pub aspect_scores: BTreeMap<AspectKind, f64>,
    pub model: ModelInfo,
    /// RFC 3339.
    pub created_at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedClaim {
    /// Sentence position in the article.
    pub index: usize,
    pub sentence: String,
    pub score: f64,
    /// True for the sentence that was fact-checked.
    pub selected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeArticleResponse {
    pub request_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    pub claims: Vec<RankedClaim>,
    /// Analysis of the top claim; absent when no sentence passed the
    /// threshold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalyzeResponse>,
    pub model: ModelInfo,
    pub created_at: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackKind {
    Verdict,
    ClaimScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackRecord {
    pub request_id: String,
    pub kind: FeedbackKind,
    pub agree: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    /// ISO-8601 / RFC 3339 timestamp.
    pub timestamp: String,
    pub claim_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackAck {
    pub status: String,
    pub request_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HealthStatus {
    Ok,
    Degraded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: HealthStatus,
    /// One entry per asset that is not loaded, e.g. `SADHAN_CKPT: not set`.
    pub missing: Vec<String>,
    pub models: ModelInfo,
    pub backend: BackendMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: ErrorDetail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDetail {
    pub code: String,
    pub message: String,
}
