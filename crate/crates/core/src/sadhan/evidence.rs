use serde::{Deserialize, Serialize};

use super::AttentionMap;

/// A document sentence with its highlight strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceSentence {
    /// Position in the document.
    pub index: usize,
    pub text: String,
    /// In `[0, 1]`; the most salient sentence of a document has 1.
    pub intensity: f64,
    /// α over the sentence's word tokens.
    pub word_weights: Vec<f64>,
}

/// Pairs each attended sentence with its normalised salience
/// `β_i · max_t α_{i,t} / max_j (β_j · max_t α_{j,t})`, in document order.
pub fn extract_evidence<S: AsRef<str>>(attn: &AttentionMap, sentences: &[S]) -> Vec<EvidenceSentence> {
    let mut out: Vec<EvidenceSentence> = attn
        .sentence_indices
        .iter()
        .zip(&attn.intensities)
        .zip(&attn.word_weights)
        .map(|((&index, &intensity), words)| EvidenceSentence {
            index,
            text: sentences.get(index).map(|s| s.as_ref().to_string()).unwrap_or_default(),
            intensity,
            word_weights: words.clone(),
        })
        .collect();
    out.sort_by_key(|e| e.index);
    out
}
