use std::collections::BTreeMap;
use std::path::Path;

use ndarray::{concatenate, s, Array1, Array2, ArrayView1, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    AspectTable, AspectTables, AspectVocabulary, SadhanDims, SadhanError, SadhanParams, Verdict, ASPECT_UNK_VALUE,
};
use crate::checkpoint::{Checkpoint, CheckpointError};
use crate::claim::{AspectKind, Claim};
use crate::nn::{
    attention_backward, attention_forward, bilstm_backward, bilstm_forward, cross_entropy, mean_rows, softmax2,
    AttentionTrace, BiLstmTrace, DropoutMask, ParamTensors,
};
use crate::text::{content_tokens, embed, EmbeddingTable, Vocabulary};

const CHECKPOINT_KIND: &str = "sadhan";

/// Attention weights for one document. Only sentences with at least one
/// word token take part; `sentence_indices` maps them back to positions in
/// the input document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionMap {
    pub sentence_indices: Vec<usize>,
    /// β, one per attended sentence.
    pub sentence_weights: Vec<f64>,
    /// α for each attended sentence, one per word token.
    pub word_weights: Vec<Vec<f64>>,
    /// `β_i · max α_i` scaled so the largest is 1.
    pub intensities: Vec<f64>,
}

impl AttentionMap {
    pub fn new(sentence_indices: Vec<usize>, sentence_weights: Vec<f64>, word_weights: Vec<Vec<f64>>) -> Self {
        let raw: Vec<f64> = sentence_weights
            .iter()
            .zip(&word_weights)
            .map(|(b, a)| b * a.iter().copied().fold(0.0, f64::max))
            .collect();
        let top = raw.iter().copied().fold(0.0, f64::max);
        let intensities = raw.iter().map(|r| if top > 0.0 { r / top } else { 0.0 }).collect();
        Self {
            sentence_indices,
            sentence_weights,
            word_weights,
            intensities,
        }
    }

    /// Elementwise mean of maps computed over the same sentences, e.g. one
    /// per aspect kind. Means of probability vectors stay normalised.
    pub fn average(maps: &[AttentionMap]) -> AttentionMap {
        let n = maps.len() as f64;
        let first = &maps[0];
        let beta = (0..first.sentence_weights.len())
            .map(|i| maps.iter().map(|m| m.sentence_weights[i]).sum::<f64>() / n)
            .collect();
        let alpha = first
            .word_weights
            .iter()
            .enumerate()
            .map(|(i, a)| {
                (0..a.len())
                    .map(|t| maps.iter().map(|m| m.word_weights[i][t]).sum::<f64>() / n)
                    .collect()
            })
            .collect();
        AttentionMap::new(first.sentence_indices.clone(), beta, alpha)
    }
}

/// Per-document outcome inside a [`CredibilityResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentResult {
    /// Position in the evidence list passed to `predict`.
    pub index: usize,
    /// `[P(true), P(false)]` averaged over aspect kinds.
    pub probabilities: [f64; 2],
    /// Attention averaged over aspect kinds.
    pub attention: AttentionMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredibilityResult {
    /// `[P(true), P(false)]`.
    pub probabilities: [f64; 2],
    /// `P(true)`.
    pub score: f64,
    pub verdict: Verdict,
    pub documents: Vec<DocumentResult>,
    /// Mean over documents of each aspect kind's sub-model output.
    pub aspect_probabilities: BTreeMap<AspectKind, [f64; 2]>,
}

/// Claim vector plus what backpropagation into the claim encoder needs.
#[derive(Debug, Clone)]
pub struct ClaimEncoding {
    pub vector: Array1<f64>,
    trace: BiLstmTrace,
    steps: usize,
}

pub(crate) fn encode_claim_embedded(params: &SadhanParams, xs: &Array2<f64>) -> ClaimEncoding {
    let (hs, trace) = bilstm_forward(xs.view(), &params.claim_encoder);
    ClaimEncoding {
        vector: mean_rows(&hs),
        trace,
        steps: xs.nrows(),
    }
}

pub(crate) fn claim_backward(
    params: &SadhanParams,
    enc: &ClaimEncoding,
    d_vec: &Array1<f64>,
    grads: &mut SadhanParams,
) {
    let row = d_vec / enc.steps as f64;
    let d_hs = Array2::from_shape_fn((enc.steps, row.len()), |(_, j)| row[j]);
    bilstm_backward(&enc.trace, d_hs.view(), &params.claim_encoder, &mut grads.claim_encoder);
}

/// A document sentence after embedding: position and `T × d` matrix.
pub(crate) type EmbeddedSentence = (usize, Array2<f64>);

pub(crate) fn embed_document<S: AsRef<str>>(sentences: &[Vec<S>], table: &EmbeddingTable) -> Vec<EmbeddedSentence> {
    sentences
        .iter()
        .enumerate()
        .filter(|(_, tokens)| !tokens.is_empty())
        .map(|(i, tokens)| (i, embed(tokens, table)))
        .collect()
}

struct SentenceTrace {
    encoder: BiLstmTrace,
    mask: Option<DropoutMask>,
    attention: AttentionTrace,
}

pub(crate) struct DocumentTrace {
    indices: Vec<usize>,
    sentences: Vec<SentenceTrace>,
    encoder: BiLstmTrace,
    mask: Option<DropoutMask>,
    attention: AttentionTrace,
    features: Array1<f64>,
    pub logits: Array1<f64>,
}

impl DocumentTrace {
    pub fn probabilities(&self) -> [f64; 2] {
        softmax2(self.logits.view())
    }

    pub fn attention_map(&self) -> AttentionMap {
        AttentionMap::new(
            self.indices.clone(),
            self.attention.weights.to_vec(),
            self.sentences.iter().map(|s| s.attention.weights.to_vec()).collect(),
        )
    }
}

/// Dropout state threaded through a training forward pass.
pub(crate) struct Dropout<'a, R> {
    pub keep: f64,
    pub rng: &'a mut R,
}

fn masked<R: Rng>(states: Array2<f64>, dropout: &mut Option<Dropout<'_, R>>) -> (Array2<f64>, Option<DropoutMask>) {
    match dropout {
        Some(d) => {
            let mask = DropoutMask::sample(states.nrows(), states.ncols(), d.keep, d.rng);
            match mask {
                Some(m) => (m.apply(&states), Some(m)),
                None => (states, None),
            }
        }
        None => (states, None),
    }
}

pub(crate) fn forward_document<R: Rng>(
    params: &SadhanParams,
    claim: ArrayView1<'_, f64>,
    aspect: ArrayView1<'_, f64>,
    sentences: &[EmbeddedSentence],
    mut dropout: Option<Dropout<'_, R>>,
) -> Result<DocumentTrace, SadhanError> {
    if sentences.is_empty() {
        return Err(SadhanError::EmptyDocument);
    }
    let m = params.word_encoder.output_dim();
    let mut traces = Vec::with_capacity(sentences.len());
    let mut sentence_vectors = Array2::zeros((sentences.len(), m));
    for (row, (_, xs)) in sentences.iter().enumerate() {
        let (hs, encoder) = bilstm_forward(xs.view(), &params.word_encoder);
        let (hs, mask) = masked(hs, &mut dropout);
        let (ctx, attention) = attention_forward(hs.view(), claim, aspect, &params.word_attention);
        sentence_vectors.row_mut(row).assign(&ctx);
        traces.push(SentenceTrace {
            encoder,
            mask,
            attention,
        });
    }
    let (gs, encoder) = bilstm_forward(sentence_vectors.view(), &params.sentence_encoder);
    let (gs, mask) = masked(gs, &mut dropout);
    let (doc, attention) = attention_forward(gs.view(), claim, aspect, &params.sentence_attention);
    let features = concatenate![Axis(0), doc, claim];
    let logits = params.w_f.dot(&features) + &params.b_f;
    Ok(DocumentTrace {
        indices: sentences.iter().map(|(i, _)| *i).collect(),
        sentences: traces,
        encoder,
        mask,
        attention,
        features,
        logits,
    })
}

/// Accumulates `weight · ∂CE(label)/∂θ` for everything downstream of the
/// claim vector and aspect vector, and returns the gradients with respect
/// to those two inputs.
pub(crate) fn backward_document(
    params: &SadhanParams,
    trace: &DocumentTrace,
    label: usize,
    weight: f64,
    grads: &mut SadhanParams,
) -> (Array1<f64>, Array1<f64>) {
    let p = trace.probabilities();
    let mut dz = Array1::from(p.to_vec());
    dz[label] -= 1.0;
    dz *= weight;
    grads.w_f += &dz
        .view()
        .insert_axis(Axis(1))
        .dot(&trace.features.view().insert_axis(Axis(0)));
    grads.b_f += &dz;
    let d_features = params.w_f.t().dot(&dz);
    let m = params.word_encoder.output_dim();
    let d_doc = d_features.slice(s![..m]).to_owned();
    let mut d_claim = d_features.slice(s![m..]).to_owned();

    let (d_gs, dc, mut d_aspect) = attention_backward(
        &trace.attention,
        d_doc.view(),
        &params.sentence_attention,
        &mut grads.sentence_attention,
    );
    d_claim += &dc;
    let d_gs = match &trace.mask {
        Some(mask) => mask.backward(&d_gs),
        None => d_gs,
    };
    let d_sentences = bilstm_backward(
        &trace.encoder,
        d_gs.view(),
        &params.sentence_encoder,
        &mut grads.sentence_encoder,
    );

    for (row, st) in trace.sentences.iter().enumerate() {
        let (d_hs, dc, da) = attention_backward(
            &st.attention,
            d_sentences.row(row),
            &params.word_attention,
            &mut grads.word_attention,
        );
        d_claim += &dc;
        d_aspect += &da;
        let d_hs = match &st.mask {
            Some(mask) => mask.backward(&d_hs),
            None => d_hs,
        };
        bilstm_backward(&st.encoder, d_hs.view(), &params.word_encoder, &mut grads.word_encoder);
    }
    (d_claim, d_aspect)
}

/// Classifier parameters with the frozen word-embedding table they were
/// trained against.
#[derive(Debug, Clone, PartialEq)]
pub struct SadhanModel {
    pub table: EmbeddingTable,
    pub params: SadhanParams,
}

impl SadhanModel {
    pub fn new(
        table: EmbeddingTable,
        dims: SadhanDims,
        aspect_values: &AspectVocabulary,
        seed: u64,
    ) -> Result<Self, SadhanError> {
        if table.dim() != dims.embed_dim {
            return Err(SadhanError::EmbeddingWidth {
                table: table.dim(),
                model: dims.embed_dim,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = SadhanParams::init(dims, aspect_values, &mut rng);
        Ok(Self { table, params })
    }

    pub fn dims(&self) -> SadhanDims {
        self.params.dims()
    }

    /// Mean over positions of the claim Bi-LSTM states.
    pub fn encode_claim(&self, claim: &Claim) -> Result<Array1<f64>, SadhanError> {
        Ok(self.encode(claim)?.vector)
    }

    fn encode(&self, claim: &Claim) -> Result<ClaimEncoding, SadhanError> {
        if claim.tokens.is_empty() {
            return Err(SadhanError::EmptyClaim);
        }
        Ok(encode_claim_embedded(&self.params, &embed(&claim.tokens, &self.table)))
    }

    /// One document under one aspect kind. `sentences` are token lists;
    /// empty ones are skipped.
    pub fn classify_document<S: AsRef<str>>(
        &self,
        claim: &Claim,
        sentences: &[Vec<S>],
        kind: AspectKind,
    ) -> Result<([f64; 2], AttentionMap), SadhanError> {
        let enc = self.encode(claim)?;
        self.classify_encoded(&enc.vector, claim, &embed_document(sentences, &self.table), kind)
    }

    fn classify_encoded(
        &self,
        claim_vec: &Array1<f64>,
        claim: &Claim,
        doc: &[EmbeddedSentence],
        kind: AspectKind,
    ) -> Result<([f64; 2], AttentionMap), SadhanError> {
        let table = self.params.aspects.get(kind);
        let aspect = table.row(self.params.aspects.row_for(claim, kind));
        let trace = forward_document::<ChaCha8Rng>(&self.params, claim_vec.view(), aspect, doc, None)?;
        Ok((trace.probabilities(), trace.attention_map()))
    }

    /// Runs every (aspect kind, document) pair, averages over kinds per
    /// document and then over documents. Documents whose sentences are all
    /// empty are skipped; if none remain the result is `NoEvidence`.
    pub fn predict<S: AsRef<str>>(&self, claim: &Claim, evidence: &[Vec<S>]) -> Result<CredibilityResult, SadhanError> {
        let docs: Vec<(usize, Vec<EmbeddedSentence>)> = evidence
            .iter()
            .enumerate()
            .map(|(i, sentences)| {
                let tokens: Vec<Vec<String>> = sentences.iter().map(|s| content_tokens(s.as_ref())).collect();
                (i, embed_document(&tokens, &self.table))
            })
            .filter(|(_, d)| !d.is_empty())
            .collect();
        if docs.is_empty() {
            return Err(SadhanError::NoEvidence);
        }
        let enc = self.encode(claim)?;
        let kinds = claim.active_kinds();

        let mut documents = Vec::with_capacity(docs.len());
        let mut per_kind: BTreeMap<AspectKind, Vec<f64>> = BTreeMap::new();
        for (index, doc) in &docs {
            let mut p_true = Vec::with_capacity(kinds.len());
            let mut maps = Vec::with_capacity(kinds.len());
            for &kind in &kinds {
                let (p, map) = self.classify_encoded(&enc.vector, claim, doc, kind)?;
                p_true.push(p[0]);
                per_kind.entry(kind).or_default().push(p[0]);
                maps.push(map);
            }
            documents.push(DocumentResult {
                index: *index,
                probabilities: pair(order_free_mean(&mut p_true)),
                attention: AttentionMap::average(&maps),
            });
        }
        let mut doc_true: Vec<f64> = documents.iter().map(|d| d.probabilities[0]).collect();
        let score = order_free_mean(&mut doc_true);
        let aspect_probabilities = per_kind
            .into_iter()
            .map(|(k, mut v)| (k, pair(order_free_mean(&mut v))))
            .collect();
        Ok(CredibilityResult {
            probabilities: pair(score),
            score,
            verdict: Verdict::from_true_probability(score),
            documents,
            aspect_probabilities,
        })
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let dims = self.dims();
        let mut ck = Checkpoint::new(CHECKPOINT_KIND);
        ck.set("embed_dim", dims.embed_dim);
        ck.set("hidden", dims.hidden);
        ck.set("aspect_dim", dims.aspect_dim);
        ck.set("attention_dim", dims.attention_dim);
        ck.push_list("vocab", self.table.vocab().tokens().to_vec());
        for kind in AspectKind::ALL {
            ck.push_list(
                format!("aspect_values.{kind}"),
                self.params.aspects.get(kind).values().to_vec(),
            );
        }
        ck.push_tensor("embedding", self.table.matrix().view().into_dyn());
        ck.push_params("sadhan", &self.params);
        ck
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self, SadhanError> {
        ck.expect_kind(CHECKPOINT_KIND)?;
        let dims = SadhanDims {
            embed_dim: ck.get_usize("embed_dim")?,
            hidden: ck.get_usize("hidden")?,
            aspect_dim: ck.get_usize("aspect_dim")?,
            attention_dim: ck.get_usize("attention_dim")?,
        };
        let vocab = Vocabulary::from_tokens(ck.list("vocab")?.iter().cloned());
        let emb = ck.tensor("embedding")?;
        let expected = vec![vocab.len(), dims.embed_dim];
        if emb.shape() != expected.as_slice() {
            return Err(CheckpointError::Dimension {
                field: "embedding".into(),
                expected,
                found: emb.shape().to_vec(),
            }
            .into());
        }
        let matrix = emb.clone().into_dimensionality().expect("rank checked above");
        let table = EmbeddingTable::new(vocab, matrix).map_err(|e| CheckpointError::Corrupt {
            field: "embedding".into(),
            reason: e.to_string(),
        })?;

        let mut aspect_values = super::empty_aspect_vocabulary();
        for (kind, values) in aspect_values.iter_mut() {
            let stored = ck.list(&format!("aspect_values.{kind}"))?;
            if stored.first().map(String::as_str) != Some(ASPECT_UNK_VALUE) {
                return Err(CheckpointError::Corrupt {
                    field: format!("aspect_values.{kind}"),
                    reason: "first value must be the unknown marker".into(),
                }
                .into());
            }
            *values = stored[1..].to_vec();
        }
        let zero_table = |kind: AspectKind| {
            let values = &aspect_values.iter().find(|(k, _)| *k == kind).expect("all kinds").1;
            AspectTable::new(values, |n| Array2::zeros((n, dims.aspect_dim)))
        };
        let aspects = AspectTables {
            author: zero_table(AspectKind::Author),
            topic: zero_table(AspectKind::Topic),
            domain: zero_table(AspectKind::Domain),
        };
        let mut params = SadhanParams::init(dims, &aspect_values, &mut ChaCha8Rng::seed_from_u64(0));
        params.aspects = aspects;
        params.fill_zero();
        ck.fill_params("sadhan", &mut params)?;
        Ok(Self { table, params })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SadhanError> {
        Ok(self.to_checkpoint().save(path)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SadhanError> {
        Self::from_checkpoint(&Checkpoint::load(path)?)
    }

    /// Loads and rejects checkpoints whose layer widths differ from `dims`.
    pub fn load_expecting(path: impl AsRef<Path>, dims: SadhanDims) -> Result<Self, SadhanError> {
        let model = Self::load(path)?;
        let found = model.dims();
        if found != dims {
            return Err(CheckpointError::Dimension {
                field: "dims".into(),
                expected: vec![dims.embed_dim, dims.hidden, dims.aspect_dim, dims.attention_dim],
                found: vec![found.embed_dim, found.hidden, found.aspect_dim, found.attention_dim],
            }
            .into());
        }
        Ok(model)
    }
}

/// Cross-entropy of a single (document, aspect kind) prediction, dropout
/// off. Words are looked up in `table`.
pub fn document_loss<S: AsRef<str>>(
    params: &SadhanParams,
    table: &EmbeddingTable,
    claim: &Claim,
    sentences: &[Vec<S>],
    kind: AspectKind,
    label: Verdict,
) -> Result<f64, SadhanError> {
    Ok(document_loss_and_gradient_inner(params, table, claim, sentences, kind, label, false)?.0)
}

/// [`document_loss`] plus the gradient with respect to every tensor of
/// `params`.
pub fn document_gradient<S: AsRef<str>>(
    params: &SadhanParams,
    table: &EmbeddingTable,
    claim: &Claim,
    sentences: &[Vec<S>],
    kind: AspectKind,
    label: Verdict,
) -> Result<(f64, SadhanParams), SadhanError> {
    let (loss, grads) = document_loss_and_gradient_inner(params, table, claim, sentences, kind, label, true)?;
    Ok((loss, grads.expect("requested")))
}

fn document_loss_and_gradient_inner<S: AsRef<str>>(
    params: &SadhanParams,
    table: &EmbeddingTable,
    claim: &Claim,
    sentences: &[Vec<S>],
    kind: AspectKind,
    label: Verdict,
    with_gradient: bool,
) -> Result<(f64, Option<SadhanParams>), SadhanError> {
    if claim.tokens.is_empty() {
        return Err(SadhanError::EmptyClaim);
    }
    let enc = encode_claim_embedded(params, &embed(&claim.tokens, table));
    let doc = embed_document(sentences, table);
    let row = params.aspects.row_for(claim, kind);
    let trace =
        forward_document::<ChaCha8Rng>(params, enc.vector.view(), params.aspects.get(kind).row(row), &doc, None)?;
    let loss = cross_entropy(&trace.logits, label.class_index());
    if !with_gradient {
        return Ok((loss, None));
    }
    let mut grads = params.zeros_like();
    let (d_claim, d_aspect) = backward_document(params, &trace, label.class_index(), 1.0, &mut grads);
    let mut g_row = grads.aspects.get_mut(kind).matrix.row_mut(row);
    g_row += &d_aspect;
    claim_backward(params, &enc, &d_claim, &mut grads);
    Ok((loss, Some(grads)))
}

/// `[p, 1 - p]`, exact-sum by construction.
fn pair(p_true: f64) -> [f64; 2] {
    [p_true, 1.0 - p_true]
}

/// Mean computed over sorted values, so the result does not depend on the
/// order documents or aspect kinds were visited in.
fn order_free_mean(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}
