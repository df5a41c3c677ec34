//! Check-worthiness scoring: an LSTM sentence classifier whose claim-class
//! softmax probability ranks the sentences of an article.

mod synthetic;
mod train;

pub use synthetic::synthetic_corpus;
pub use train::{
    cross_validate_worthiness, evaluate_worthiness, restrict_table, train_worthiness, CrossValidation,
    WorthinessMetrics,
};

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayViewD, ArrayViewMutD, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checkpoint::{Checkpoint, CheckpointError};
use crate::metrics::MetricsError;
use crate::nn::{
    cross_entropy, lstm_backward, lstm_forward, mean_rows, prefixed, softmax2, uniform_matrix, DropoutMask, LstmParams,
    ParamTensors,
};
use crate::retrieval::Article;
use crate::text::{content_tokens, embed, EmbeddingTable, Sentence, Vocabulary};
use crate::train::ConfigError;

pub const DEFAULT_HIDDEN: usize = 64;
const CHECKPOINT_KIND: &str = "worthiness";

/// Logit index of the claim class; index 1 is non-claim.
pub const CLAIM_CLASS: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WorthinessLabel {
    Claim,
    NonClaim,
}

impl WorthinessLabel {
    pub fn class_index(self) -> usize {
        match self {
            WorthinessLabel::Claim => CLAIM_CLASS,
            WorthinessLabel::NonClaim => 1 - CLAIM_CLASS,
        }
    }
}

impl fmt::Display for WorthinessLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WorthinessLabel::Claim => "claim",
            WorthinessLabel::NonClaim => "non-claim",
        })
    }
}

impl FromStr for WorthinessLabel {
    type Err = WorthinessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "claim" => Ok(WorthinessLabel::Claim),
            "non-claim" => Ok(WorthinessLabel::NonClaim),
            other => Err(WorthinessError::Label(other.to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum WorthinessError {
    #[error("unknown label {0:?} (expected claim or non-claim)")]
    Label(String),
    #[error("dataset line {line}: {reason}")]
    Dataset { line: usize, reason: String },
    #[error("training data must contain both claim and non-claim sentences")]
    SingleLabel,
    #[error("training data is empty")]
    Empty,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("reading dataset: {0}")]
    Io(#[from] std::io::Error),
}

/// Trainable tensors: LSTM plus the two-logit output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct WorthinessParams {
    pub lstm: LstmParams,
    /// `2 × h`
    pub w_o: Array2<f64>,
    pub b_o: Array1<f64>,
}

impl WorthinessParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            lstm: LstmParams::zeros(input, hidden),
            w_o: Array2::zeros((2, hidden)),
            b_o: Array1::zeros(2),
        }
    }

    pub fn init<R: Rng>(input: usize, hidden: usize, rng: &mut R) -> Self {
        let lstm = LstmParams::init(input, hidden, rng);
        let bound = (6.0 / (hidden + 2) as f64).sqrt();
        Self {
            lstm,
            w_o: uniform_matrix(rng, 2, hidden, bound),
            b_o: Array1::zeros(2),
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.lstm.hidden_dim()
    }
}

impl ParamTensors for WorthinessParams {
    fn tensors(&self) -> Vec<(String, ArrayViewD<'_, f64>)> {
        let mut v: Vec<_> = prefixed("lstm", self.lstm.tensors()).collect();
        v.push(("w_o".into(), self.w_o.view().into_dyn()));
        v.push(("b_o".into(), self.b_o.view().into_dyn()));
        v
    }

    fn tensors_mut(&mut self) -> Vec<(String, ArrayViewMutD<'_, f64>)> {
        let Self { lstm, w_o, b_o } = self;
        let mut v: Vec<_> = prefixed("lstm", lstm.tensors_mut()).collect();
        v.push(("w_o".into(), w_o.view_mut().into_dyn()));
        v.push(("b_o".into(), b_o.view_mut().into_dyn()));
        v
    }
}

/// A sentence with its claim-class probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSentence {
    pub sentence: Sentence,
    pub score: f64,
}

/// Forward pass over pre-embedded tokens, returning logits and a trace
/// for [`backward`].
pub(crate) struct Forward {
    trace: crate::nn::LstmTrace,
    pooled: Array1<f64>,
    mask: Option<DropoutMask>,
    steps: usize,
    pub logits: Array1<f64>,
}

pub(crate) fn forward<R: Rng>(params: &WorthinessParams, xs: &Array2<f64>, dropout: Option<(f64, &mut R)>) -> Forward {
    let (hs, trace) = lstm_forward(xs.view(), &params.lstm);
    let pooled = mean_rows(&hs);
    let mask = dropout.and_then(|(keep, rng)| DropoutMask::sample(1, pooled.len(), keep, rng));
    let dropped = match &mask {
        Some(m) => m.apply(&pooled.clone().insert_axis(Axis(0))).row(0).to_owned(),
        None => pooled.clone(),
    };
    let logits = params.w_o.dot(&dropped) + &params.b_o;
    Forward {
        trace,
        pooled: dropped,
        mask,
        steps: xs.nrows(),
        logits,
    }
}

/// Accumulates `weight · ∂CE/∂params` into `grads`.
pub(crate) fn backward(
    params: &WorthinessParams,
    fwd: &Forward,
    label: usize,
    weight: f64,
    grads: &mut WorthinessParams,
) {
    let p = softmax2(fwd.logits.view());
    let mut dz = Array1::from(p.to_vec());
    dz[label] -= 1.0;
    dz *= weight;
    grads.w_o += &dz
        .view()
        .insert_axis(Axis(1))
        .dot(&fwd.pooled.view().insert_axis(Axis(0)));
    grads.b_o += &dz;
    let d_pooled = params.w_o.t().dot(&dz);
    let d_pooled = match &fwd.mask {
        Some(m) => m.backward(&d_pooled.insert_axis(Axis(0))).row(0).to_owned(),
        None => d_pooled,
    };
    let row = d_pooled / fwd.steps as f64;
    let d_hs = Array2::from_shape_fn((fwd.steps, row.len()), |(_, j)| row[j]);
    lstm_backward(&fwd.trace, d_hs.view(), &params.lstm, &mut grads.lstm);
}

/// Cross-entropy of one labelled sentence, dropout off. `None` when the
/// sentence has no word tokens.
pub fn sentence_loss(
    params: &WorthinessParams,
    table: &EmbeddingTable,
    text: &str,
    label: WorthinessLabel,
) -> Option<f64> {
    let tokens = content_tokens(text);
    if tokens.is_empty() {
        return None;
    }
    let fwd = forward::<ChaCha8Rng>(params, &embed(&tokens, table), None);
    Some(cross_entropy(&fwd.logits, label.class_index()))
}

/// [`sentence_loss`] and its gradient with respect to every tensor.
pub fn sentence_gradient(
    params: &WorthinessParams,
    table: &EmbeddingTable,
    text: &str,
    label: WorthinessLabel,
) -> Option<(f64, WorthinessParams)> {
    let tokens = content_tokens(text);
    if tokens.is_empty() {
        return None;
    }
    let fwd = forward::<ChaCha8Rng>(params, &embed(&tokens, table), None);
    let mut grads = WorthinessParams::zeros(params.lstm.input_dim(), params.hidden_dim());
    backward(params, &fwd, label.class_index(), 1.0, &mut grads);
    Some((cross_entropy(&fwd.logits, label.class_index()), grads))
}

/// Sentence classifier over a frozen embedding table.
#[derive(Debug, Clone, PartialEq)]
pub struct WorthinessModel {
    pub table: EmbeddingTable,
    pub params: WorthinessParams,
}

impl WorthinessModel {
    pub fn new(table: EmbeddingTable, hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = WorthinessParams::init(table.dim(), hidden, &mut rng);
        Self { table, params }
    }

    /// `[P(claim), P(non-claim)]`, or `None` when the text has no word
    /// tokens.
    pub fn probabilities(&self, text: &str) -> Option<[f64; 2]> {
        let tokens = content_tokens(text);
        if tokens.is_empty() {
            return None;
        }
        let xs = embed(&tokens, &self.table);
        let fwd = forward::<ChaCha8Rng>(&self.params, &xs, None);
        Some(softmax2(fwd.logits.view()))
    }

    /// Claim-class probability; 0 for sentences without word tokens.
    pub fn score_sentence(&self, sentence: &Sentence) -> ScoredSentence {
        let score = self
            .probabilities(&sentence.text)
            .map(|p| p[CLAIM_CLASS])
            .unwrap_or(0.0);
        ScoredSentence {
            sentence: sentence.clone(),
            score,
        }
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let mut ck = Checkpoint::new(CHECKPOINT_KIND);
        ck.set("embed_dim", self.table.dim());
        ck.set("hidden", self.params.hidden_dim());
        ck.push_list("vocab", self.table.vocab().tokens().to_vec());
        ck.push_tensor("embedding", self.table.matrix().view().into_dyn());
        ck.push_params("worthiness", &self.params);
        ck
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self, WorthinessError> {
        ck.expect_kind(CHECKPOINT_KIND)?;
        let dim = ck.get_usize("embed_dim")?;
        let hidden = ck.get_usize("hidden")?;
        let vocab = Vocabulary::from_tokens(ck.list("vocab")?.iter().cloned());
        let emb = ck.tensor("embedding")?;
        if emb.shape() != [vocab.len(), dim] {
            return Err(CheckpointError::Dimension {
                field: "embedding".into(),
                expected: vec![vocab.len(), dim],
                found: emb.shape().to_vec(),
            }
            .into());
        }
        let matrix = emb.clone().into_dimensionality().expect("rank checked above");
        let table = EmbeddingTable::new(vocab, matrix).map_err(|e| CheckpointError::Corrupt {
            field: "embedding".into(),
            reason: e.to_string(),
        })?;
        let mut params = WorthinessParams::zeros(dim, hidden);
        ck.fill_params("worthiness", &mut params)?;
        Ok(Self { table, params })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), WorthinessError> {
        Ok(self.to_checkpoint().save(path)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, WorthinessError> {
        Self::from_checkpoint(&Checkpoint::load(path)?)
    }
}

/// Filter by `score >= threshold`, sort by descending score (ties by
/// sentence index) and keep the first `top_k`.
pub fn rank_scored(mut scored: Vec<ScoredSentence>, threshold: f64, top_k: usize) -> Vec<ScoredSentence> {
    scored.retain(|s| s.score >= threshold);
    scored.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.sentence.index.cmp(&b.sentence.index))
    });
    scored.truncate(top_k);
    scored
}

/// Scores every sentence of `article` and ranks them.
pub fn rank_claims(model: &WorthinessModel, article: &Article, threshold: f64, top_k: usize) -> Vec<ScoredSentence> {
    let scored = article.sentences.iter().map(|s| model.score_sentence(s)).collect();
    rank_scored(scored, threshold, top_k)
}

/// Reads `sentence<TAB>label` lines; blank lines are skipped.
pub fn read_tsv(text: &str) -> Result<Vec<(String, WorthinessLabel)>, WorthinessError> {
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (sentence, label) = line.rsplit_once('\t').ok_or_else(|| WorthinessError::Dataset {
            line: n + 1,
            reason: "expected sentence<TAB>label".into(),
        })?;
        let label = label.parse().map_err(|e: WorthinessError| WorthinessError::Dataset {
            line: n + 1,
            reason: e.to_string(),
        })?;
        rows.push((sentence.to_string(), label));
    }
    Ok(rows)
}

pub fn write_tsv(rows: &[(String, WorthinessLabel)]) -> String {
    rows.iter()
        .map(|(s, l)| format!("{}\t{l}\n", s.replace(['\t', '\n'], " ")))
        .collect()
}
