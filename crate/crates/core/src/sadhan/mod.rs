//! Hierarchical word/sentence Bi-LSTM credibility classifier with additive
//! attention conditioned on the claim encoding and a latent-aspect vector.

mod data;
mod evidence;
mod model;
mod train;

pub use data::{
    load_dataset, load_evidence_dir, load_example, toy_dataset, toy_dataset_with_dim, write_dataset, DatasetError,
};
pub use evidence::{extract_evidence, EvidenceSentence};
pub use model::{
    document_gradient, document_loss, AttentionMap, ClaimEncoding, CredibilityResult, DocumentResult, SadhanModel,
};
pub use train::{cross_validate, evaluate, train, CrossValidation, SadhanMetrics};

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1, ArrayViewD, ArrayViewMutD};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checkpoint::CheckpointError;
use crate::claim::{AspectKind, Claim};
use crate::metrics::MetricsError;
use crate::nn::{prefixed, uniform_matrix, AttentionParams, BiLstmParams, ParamTensors};
use crate::train::ConfigError;

/// Verdict classes in logit order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    True,
    False,
}

impl Verdict {
    pub fn class_index(self) -> usize {
        match self {
            Verdict::True => 0,
            Verdict::False => 1,
        }
    }

    pub fn from_true_probability(p_true: f64) -> Self {
        if p_true >= 0.5 {
            Verdict::True
        } else {
            Verdict::False
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::True => "true",
            Verdict::False => "false",
        })
    }
}

impl FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "true" => Ok(Verdict::True),
            "false" => Ok(Verdict::False),
            other => Err(format!("unknown label {other:?} (expected true or false)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum SadhanError {
    #[error("claim has no word tokens")]
    EmptyClaim,
    #[error("document has no non-empty sentences")]
    EmptyDocument,
    #[error("no usable evidence documents")]
    NoEvidence,
    #[error("training data must contain both true and false examples")]
    SingleLabel,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("embedding width {table} does not match model input width {model}")]
    EmbeddingWidth { table: usize, model: usize },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}

/// Layer widths. `Default` is the small desk-scale configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SadhanDims {
    pub embed_dim: usize,
    /// Per direction; Bi-LSTM outputs are `2 * hidden` wide.
    pub hidden: usize,
    pub aspect_dim: usize,
    pub attention_dim: usize,
}

impl Default for SadhanDims {
    fn default() -> Self {
        Self {
            embed_dim: 16,
            hidden: 8,
            aspect_dim: 8,
            attention_dim: 16,
        }
    }
}

impl SadhanDims {
    /// 100-d word vectors and 200 hidden units per direction.
    pub fn full_scale() -> Self {
        Self {
            embed_dim: 100,
            hidden: 200,
            aspect_dim: 100,
            attention_dim: 200,
        }
    }

    pub fn state_dim(&self) -> usize {
        2 * self.hidden
    }
}

/// Value index of the unknown-aspect row in every [`AspectTable`].
pub const ASPECT_UNK: usize = 0;
pub const ASPECT_UNK_VALUE: &str = "<unk>";

/// Embeddings for the values of one aspect kind; row 0 is the UNK vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AspectTable {
    values: Vec<String>,
    index: HashMap<String, usize>,
    pub matrix: Array2<f64>,
}

impl AspectTable {
    /// Values are deduplicated and lowercased; order of first appearance
    /// is kept.
    pub fn new<I, S>(values: I, matrix_for: impl FnOnce(usize) -> Array2<f64>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut all = vec![ASPECT_UNK_VALUE.to_string()];
        let mut index = HashMap::new();
        index.insert(ASPECT_UNK_VALUE.to_string(), ASPECT_UNK);
        for v in values {
            let v = normalise_value(v.as_ref());
            if v.is_empty() || index.contains_key(&v) {
                continue;
            }
            index.insert(v.clone(), all.len());
            all.push(v);
        }
        let matrix = matrix_for(all.len());
        Self {
            values: all,
            index,
            matrix,
        }
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row for `value`; missing or unseen values map to the UNK row.
    pub fn row_index(&self, value: Option<&str>) -> usize {
        value
            .and_then(|v| self.index.get(&normalise_value(v)).copied())
            .unwrap_or(ASPECT_UNK)
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.matrix.row(i)
    }
}

fn normalise_value(v: &str) -> String {
    v.trim().to_lowercase()
}

/// One [`AspectTable`] per aspect kind.
#[derive(Debug, Clone, PartialEq)]
pub struct AspectTables {
    pub author: AspectTable,
    pub topic: AspectTable,
    pub domain: AspectTable,
}

impl AspectTables {
    pub fn get(&self, kind: AspectKind) -> &AspectTable {
        match kind {
            AspectKind::Author => &self.author,
            AspectKind::Topic => &self.topic,
            AspectKind::Domain => &self.domain,
        }
    }

    pub fn get_mut(&mut self, kind: AspectKind) -> &mut AspectTable {
        match kind {
            AspectKind::Author => &mut self.author,
            AspectKind::Topic => &mut self.topic,
            AspectKind::Domain => &mut self.domain,
        }
    }

    /// Row index for the claim's value of `kind` (UNK when absent).
    pub fn row_for(&self, claim: &Claim, kind: AspectKind) -> usize {
        self.get(kind).row_index(claim.aspects.get(&kind).map(String::as_str))
    }
}

impl ParamTensors for AspectTables {
    fn tensors(&self) -> Vec<(String, ArrayViewD<'_, f64>)> {
        AspectKind::ALL
            .iter()
            .map(|k| (k.as_str().to_string(), self.get(*k).matrix.view().into_dyn()))
            .collect()
    }

    fn tensors_mut(&mut self) -> Vec<(String, ArrayViewMutD<'_, f64>)> {
        let Self { author, topic, domain } = self;
        vec![
            ("author".into(), author.matrix.view_mut().into_dyn()),
            ("topic".into(), topic.matrix.view_mut().into_dyn()),
            ("domain".into(), domain.matrix.view_mut().into_dyn()),
        ]
    }
}

/// Every trainable tensor of the classifier. Word embeddings are frozen
/// and live in the model's [`EmbeddingTable`](crate::text::EmbeddingTable).
#[derive(Debug, Clone, PartialEq)]
pub struct SadhanParams {
    pub claim_encoder: BiLstmParams,
    pub word_encoder: BiLstmParams,
    pub sentence_encoder: BiLstmParams,
    pub word_attention: AttentionParams,
    pub sentence_attention: AttentionParams,
    pub aspects: AspectTables,
    /// `2 × 4h`: `[document ; claim]` to (true, false) logits.
    pub w_f: Array2<f64>,
    pub b_f: Array1<f64>,
}

/// Aspect values known to a model, per kind.
pub type AspectVocabulary = [(AspectKind, Vec<String>); 3];

pub fn empty_aspect_vocabulary() -> AspectVocabulary {
    [
        (AspectKind::Author, Vec::new()),
        (AspectKind::Topic, Vec::new()),
        (AspectKind::Domain, Vec::new()),
    ]
}

impl SadhanParams {
    pub fn init<R: Rng>(dims: SadhanDims, aspect_values: &AspectVocabulary, rng: &mut R) -> Self {
        let SadhanDims {
            embed_dim: d,
            hidden: h,
            aspect_dim: da,
            attention_dim: k,
        } = dims;
        let m = 2 * h;
        let claim_encoder = BiLstmParams::init(d, h, rng);
        let word_encoder = BiLstmParams::init(d, h, rng);
        let sentence_encoder = BiLstmParams::init(m, h, rng);
        let word_attention = AttentionParams::init(m, m, da, k, rng);
        let sentence_attention = AttentionParams::init(m, m, da, k, rng);
        let aspect_bound = (3.0 / da as f64).sqrt() * 0.5;
        let mut table = |kind: AspectKind| {
            let values = &aspect_values.iter().find(|(k, _)| *k == kind).expect("all kinds").1;
            AspectTable::new(values, |n| uniform_matrix(rng, n, da, aspect_bound))
        };
        let aspects = AspectTables {
            author: table(AspectKind::Author),
            topic: table(AspectKind::Topic),
            domain: table(AspectKind::Domain),
        };
        let bound = (6.0 / (2 * m + 2) as f64).sqrt();
        Self {
            claim_encoder,
            word_encoder,
            sentence_encoder,
            word_attention,
            sentence_attention,
            aspects,
            w_f: uniform_matrix(rng, 2, 2 * m, bound),
            b_f: Array1::zeros(2),
        }
    }

    /// Same shapes and aspect vocabularies, all values zero.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.fill_zero();
        z
    }

    pub fn dims(&self) -> SadhanDims {
        SadhanDims {
            embed_dim: self.word_encoder.input_dim(),
            hidden: self.word_encoder.hidden_dim(),
            aspect_dim: self.aspects.author.matrix.ncols(),
            attention_dim: self.word_attention.b.len(),
        }
    }
}

impl ParamTensors for SadhanParams {
    fn tensors(&self) -> Vec<(String, ArrayViewD<'_, f64>)> {
        let mut v: Vec<_> = prefixed("claim_encoder", self.claim_encoder.tensors())
            .chain(prefixed("word_encoder", self.word_encoder.tensors()))
            .chain(prefixed("sentence_encoder", self.sentence_encoder.tensors()))
            .chain(prefixed("word_attention", self.word_attention.tensors()))
            .chain(prefixed("sentence_attention", self.sentence_attention.tensors()))
            .chain(prefixed("aspect", self.aspects.tensors()))
            .collect();
        v.push(("w_f".into(), self.w_f.view().into_dyn()));
        v.push(("b_f".into(), self.b_f.view().into_dyn()));
        v
    }

    fn tensors_mut(&mut self) -> Vec<(String, ArrayViewMutD<'_, f64>)> {
        let Self {
            claim_encoder,
            word_encoder,
            sentence_encoder,
            word_attention,
            sentence_attention,
            aspects,
            w_f,
            b_f,
        } = self;
        let mut v: Vec<_> = prefixed("claim_encoder", claim_encoder.tensors_mut())
            .chain(prefixed("word_encoder", word_encoder.tensors_mut()))
            .chain(prefixed("sentence_encoder", sentence_encoder.tensors_mut()))
            .chain(prefixed("word_attention", word_attention.tensors_mut()))
            .chain(prefixed("sentence_attention", sentence_attention.tensors_mut()))
            .chain(prefixed("aspect", aspects.tensors_mut()))
            .collect();
        v.push(("w_f".into(), w_f.view_mut().into_dyn()));
        v.push(("b_f".into(), b_f.view_mut().into_dyn()));
        v
    }
}

/// A labelled claim with its evidence documents, each a list of sentence
/// texts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SadhanExample {
    pub claim: Claim,
    pub documents: Vec<Vec<String>>,
    pub label: Verdict,
}

/// Aspect values observed in `data`, per kind, in order of appearance.
pub fn aspect_vocabulary(data: &[SadhanExample]) -> AspectVocabulary {
    let mut vocab = empty_aspect_vocabulary();
    for ex in data {
        for (kind, values) in vocab.iter_mut() {
            if let Some(v) = ex.claim.aspects.get(kind) {
                values.push(v.clone());
            }
        }
    }
    vocab
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn aspect_lookup_falls_back_to_unk() {
        let t = AspectTable::new(["Alice", "bob", "alice"], |n| Array2::zeros((n, 2)));
        assert_eq!(t.values(), ["<unk>", "alice", "bob"]);
        assert_eq!(t.row_index(Some(" ALICE ")), 1);
        assert_eq!(t.row_index(Some("carol")), ASPECT_UNK);
        assert_eq!(t.row_index(None), ASPECT_UNK);
    }

    #[test]
    fn shapes_follow_dims() {
        let dims = SadhanDims::default();
        let p = SadhanParams::init(dims, &empty_aspect_vocabulary(), &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(p.dims(), dims);
        assert_eq!(p.w_f.dim(), (2, 4 * dims.hidden));
        assert_eq!(p.sentence_encoder.input_dim(), 2 * dims.hidden);
        assert_eq!(p.aspects.domain.matrix.dim(), (1, dims.aspect_dim));
        assert!(p.all_finite());
        let names: Vec<_> = p.tensors().into_iter().map(|(n, _)| n).collect();
        assert!(names.contains(&"aspect.topic".to_string()));
        assert!(names.contains(&"word_attention.w_a".to_string()));
    }

    #[test]
    fn verdict_parsing() {
        assert_eq!("True\n".parse::<Verdict>().unwrap(), Verdict::True);
        assert!("maybe".parse::<Verdict>().is_err());
        assert_eq!(Verdict::from_true_probability(0.5), Verdict::True);
        assert_eq!(Verdict::from_true_probability(0.4999), Verdict::False);
    }
}
