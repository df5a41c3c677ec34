use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{
    backward_document, claim_backward, embed_document, encode_claim_embedded, forward_document, Dropout,
    EmbeddedSentence,
};
use super::{aspect_vocabulary, SadhanDims, SadhanError, SadhanExample, SadhanModel, Verdict};
use crate::claim::AspectKind;
use crate::metrics::{auc, k_fold_indices, training_indices, Confusion};
use crate::nn::{Optimizer, ParamTensors};
use crate::text::{content_tokens, embed, EmbeddingTable};
use crate::train::{BestSoFar, TrainConfig, TrainReport};

/// Example with embeddings looked up once.
struct Prepared {
    claim: Array2<f64>,
    /// (kind, aspect row) pairs to run.
    aspects: Vec<(AspectKind, usize)>,
    docs: Vec<Vec<EmbeddedSentence>>,
    label: usize,
}

fn prepare(model: &SadhanModel, data: &[SadhanExample]) -> Result<Vec<Prepared>, SadhanError> {
    data.iter()
        .map(|ex| {
            if ex.claim.tokens.is_empty() {
                return Err(SadhanError::EmptyClaim);
            }
            let docs: Vec<_> = ex
                .documents
                .iter()
                .map(|d| {
                    let tokens: Vec<Vec<String>> = d.iter().map(|s| content_tokens(s)).collect();
                    embed_document(&tokens, &model.table)
                })
                .filter(|d| !d.is_empty())
                .collect();
            if docs.is_empty() {
                return Err(SadhanError::NoEvidence);
            }
            let aspects = ex
                .claim
                .active_kinds()
                .into_iter()
                .map(|k| (k, model.params.aspects.row_for(&ex.claim, k)))
                .collect();
            Ok(Prepared {
                claim: embed(&ex.claim.tokens, &model.table),
                aspects,
                docs,
                label: ex.label.class_index(),
            })
        })
        .collect()
}

/// Mean sub-prediction cross-entropy and aggregated `P(true)` for one
/// example, dropout off.
fn score(model: &SadhanModel, ex: &Prepared) -> (f64, f64) {
    let p = &model.params;
    let enc = encode_claim_embedded(p, &ex.claim);
    let mut loss = 0.0;
    let mut doc_true = Vec::with_capacity(ex.docs.len());
    for doc in &ex.docs {
        let mut kind_true = Vec::with_capacity(ex.aspects.len());
        for &(kind, row) in &ex.aspects {
            let t = forward_document::<ChaCha8Rng>(p, enc.vector.view(), p.aspects.get(kind).row(row), doc, None)
                .expect("prepared documents are non-empty");
            let probs = t.probabilities();
            loss -= probs[ex.label].max(f64::MIN_POSITIVE).ln();
            kind_true.push(probs[0]);
        }
        doc_true.push(kind_true.iter().sum::<f64>() / kind_true.len() as f64);
    }
    let n = (ex.docs.len() * ex.aspects.len()) as f64;
    (loss / n, doc_true.iter().sum::<f64>() / doc_true.len() as f64)
}

/// Per-class accuracy, macro-F1 and AUC of `P(false)` against the false
/// label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SadhanMetrics {
    pub true_accuracy: f64,
    pub false_accuracy: f64,
    pub macro_f1: f64,
    /// `None` when only one class is present.
    pub auc: Option<f64>,
}

fn metrics_from(p_true: &[f64], labels: &[usize]) -> Result<SadhanMetrics, SadhanError> {
    let predicted: Vec<bool> = p_true
        .iter()
        .map(|&p| Verdict::from_true_probability(p) == Verdict::True)
        .collect();
    let actual: Vec<bool> = labels.iter().map(|&l| l == Verdict::True.class_index()).collect();
    let c = Confusion::from_pairs(&predicted, &actual)?;
    let p_false: Vec<f64> = p_true.iter().map(|p| 1.0 - p).collect();
    let is_false: Vec<bool> = actual.iter().map(|a| !a).collect();
    Ok(SadhanMetrics {
        true_accuracy: c.recall(),
        false_accuracy: c.flipped().recall(),
        macro_f1: c.macro_f1(),
        auc: auc(&p_false, &is_false),
    })
}

fn evaluate_prepared(model: &SadhanModel, data: &[Prepared]) -> Result<(SadhanMetrics, f64), SadhanError> {
    let mut p_true = Vec::with_capacity(data.len());
    let mut labels = Vec::with_capacity(data.len());
    let mut loss = 0.0;
    for ex in data {
        let (l, p) = score(model, ex);
        loss += l;
        p_true.push(p);
        labels.push(ex.label);
    }
    let m = metrics_from(&p_true, &labels)?;
    Ok((m, loss / data.len().max(1) as f64))
}

pub fn evaluate(model: &SadhanModel, data: &[SadhanExample]) -> Result<SadhanMetrics, SadhanError> {
    if data.is_empty() {
        return Err(SadhanError::EmptyDataset);
    }
    Ok(evaluate_prepared(model, &prepare(model, data)?)?.0)
}

/// Mini-batch training on the mean cross-entropy over every (aspect kind,
/// document) sub-prediction. Dropout is applied to both Bi-LSTM outputs.
/// After each epoch the model is scored on `validation` (the training set
/// when `None`) and the parameters with the best macro-F1 are kept.
pub fn train(
    model: &mut SadhanModel,
    data: &[SadhanExample],
    validation: Option<&[SadhanExample]>,
    config: &TrainConfig,
) -> Result<TrainReport, SadhanError> {
    config.validate()?;
    if data.is_empty() {
        return Err(SadhanError::EmptyDataset);
    }
    if data.iter().all(|e| e.label == data[0].label) {
        return Err(SadhanError::SingleLabel);
    }
    let examples = prepare(model, data)?;
    let held_out = match validation {
        Some(v) if !v.is_empty() => Some(prepare(model, v)?),
        _ => None,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut optimizer = Optimizer::new(config.optimizer, config.learning_rate);
    let mut grads = model.params.zeros_like();
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut report = TrainReport::default();
    let mut best = BestSoFar::new();

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            grads.fill_zero();
            for &i in batch {
                accumulate(model, &examples[i], batch.len(), config.keep_prob, &mut rng, &mut grads);
            }
            optimizer.step(&mut model.params, &grads);
        }
        let (train_metrics, loss) = evaluate_prepared(model, &examples)?;
        let metric = match &held_out {
            Some(v) => evaluate_prepared(model, v)?.0.macro_f1,
            None => train_metrics.macro_f1,
        };
        report.epoch_losses.push(loss);
        report.epoch_metrics.push(metric);
        best.offer(epoch, metric, loss, || model.params.clone());
    }
    if let Some(params) = best.value {
        model.params = params;
        report.best_epoch = best.epoch;
    }
    Ok(report)
}

fn accumulate(
    model: &SadhanModel,
    ex: &Prepared,
    batch_len: usize,
    keep: f64,
    rng: &mut ChaCha8Rng,
    grads: &mut super::SadhanParams,
) {
    let p = &model.params;
    let enc = encode_claim_embedded(p, &ex.claim);
    let weight = 1.0 / (batch_len * ex.docs.len() * ex.aspects.len()) as f64;
    let mut d_claim = Array1::zeros(enc.vector.len());
    for doc in &ex.docs {
        for &(kind, row) in &ex.aspects {
            let aspect = p.aspects.get(kind).row(row);
            let dropout = Some(Dropout { keep, rng: &mut *rng });
            let trace =
                forward_document(p, enc.vector.view(), aspect, doc, dropout).expect("prepared documents are non-empty");
            let (dc, da) = backward_document(p, &trace, ex.label, weight, grads);
            d_claim += &dc;
            let mut g_row = grads.aspects.get_mut(kind).matrix.row_mut(row);
            g_row += &da;
        }
    }
    claim_backward(p, &enc, &d_claim, grads);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub folds: Vec<SadhanMetrics>,
    pub mean_true_accuracy: f64,
    pub mean_false_accuracy: f64,
    pub mean_macro_f1: f64,
    /// Mean over folds where AUC is defined.
    pub mean_auc: Option<f64>,
}

/// Seeded k-fold cross-validation. Each fold gets a fresh model whose
/// aspect tables cover only the training split's values.
pub fn cross_validate(
    data: &[SadhanExample],
    table: &EmbeddingTable,
    dims: SadhanDims,
    k: usize,
    config: &TrainConfig,
) -> Result<CrossValidation, SadhanError> {
    let folds = k_fold_indices(data.len(), k, config.seed)?;
    let mut results = Vec::with_capacity(k);
    for (f, held_out) in folds.iter().enumerate() {
        let train_set: Vec<_> = training_indices(data.len(), held_out)
            .into_iter()
            .map(|i| data[i].clone())
            .collect();
        let test_set: Vec<_> = held_out.iter().map(|&i| data[i].clone()).collect();
        let mut model = SadhanModel::new(
            table.clone(),
            dims,
            &aspect_vocabulary(&train_set),
            config.seed.wrapping_add(f as u64),
        )?;
        train(&mut model, &train_set, None, config)?;
        results.push(evaluate(&model, &test_set)?);
    }
    let n = results.len() as f64;
    let aucs: Vec<f64> = results.iter().filter_map(|m| m.auc).collect();
    Ok(CrossValidation {
        mean_true_accuracy: results.iter().map(|m| m.true_accuracy).sum::<f64>() / n,
        mean_false_accuracy: results.iter().map(|m| m.false_accuracy).sum::<f64>() / n,
        mean_macro_f1: results.iter().map(|m| m.macro_f1).sum::<f64>() / n,
        mean_auc: (!aucs.is_empty()).then(|| aucs.iter().sum::<f64>() / aucs.len() as f64),
        folds: results,
    })
}
