use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::extract::Article;
use crate::claim::Claim;
use crate::text::{content_tokens, EmbeddingTable};

/// Similarity a sentence must exceed to count as evidence.
pub const SNIPPET_THRESHOLD: f64 = 0.75;

/// A run of adjacent claim-relevant sentences from one article.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snippet {
    pub url: String,
    /// Inclusive sentence index range.
    pub start: usize,
    pub end: usize,
    pub text: String,
    /// Highest sentence similarity in the run.
    pub similarity: f64,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("vector dimensions differ: {left} vs {right}")]
pub struct DimensionMismatch {
    pub left: usize,
    pub right: usize,
}

/// Mean of the token rows; the zero vector for no tokens.
pub fn sentence_vector<S: AsRef<str>>(tokens: &[S], table: &EmbeddingTable) -> Array1<f64> {
    let mut sum = Array1::zeros(table.dim());
    if tokens.is_empty() {
        return sum;
    }
    for t in tokens {
        sum += &table.vector(t.as_ref());
    }
    sum / tokens.len() as f64
}

/// Cosine similarity, or 0 when either vector has zero norm.
pub fn cosine(u: ArrayView1<'_, f64>, v: ArrayView1<'_, f64>) -> Result<f64, DimensionMismatch> {
    if u.len() != v.len() {
        return Err(DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let (mut dot, mut uu, mut vv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v.iter()) {
        dot += a * b;
        uu += a * a;
        vv += b * b;
    }
    if uu == 0.0 || vv == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (uu * vv).sqrt()).clamp(-1.0, 1.0))
}

/// Keeps sentences whose similarity to the claim is strictly above
/// `threshold` and merges adjacent kept sentences into snippets.
pub fn filter_snippets(claim: &Claim, article: &Article, threshold: f64, table: &EmbeddingTable) -> Vec<Snippet> {
    let claim_vec = sentence_vector(&claim.tokens, table);
    let mut snippets: Vec<Snippet> = Vec::new();
    let mut open = false;
    for (pos, sentence) in article.sentences.iter().enumerate() {
        let vec = sentence_vector(&content_tokens(&sentence.text), table);
        let sim = cosine(claim_vec.view(), vec.view()).expect("same table dimension");
        if sim <= threshold {
            open = false;
            continue;
        }
        match snippets.last_mut() {
            Some(last) if open => {
                last.end = pos;
                last.text.push(' ');
                last.text.push_str(&sentence.text);
                last.similarity = last.similarity.max(sim);
            }
            _ => snippets.push(Snippet {
                url: article.url.clone(),
                start: pos,
                end: pos,
                text: sentence.text.clone(),
                similarity: sim,
            }),
        }
        open = true;
    }
    snippets
}
