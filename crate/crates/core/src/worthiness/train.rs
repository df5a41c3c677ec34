use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{backward, forward, WorthinessError, WorthinessLabel, WorthinessModel, WorthinessParams, CLAIM_CLASS};
use crate::metrics::{k_fold_indices, Confusion};
use crate::nn::{cross_entropy, Optimizer, ParamTensors};
use crate::text::{build_vocabulary, content_tokens, embed, EmbeddingTable};
use crate::train::{BestSoFar, TrainConfig, TrainReport};

/// Precision and recall of the claim class plus micro-F1 over both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorthinessMetrics {
    pub precision: f64,
    pub recall: f64,
    pub micro_f1: f64,
}

struct Example {
    xs: ndarray::Array2<f64>,
    label: usize,
}

fn prepare(table: &EmbeddingTable, data: &[(String, WorthinessLabel)]) -> Vec<Example> {
    data.iter()
        .filter_map(|(text, label)| {
            let tokens = content_tokens(text);
            (!tokens.is_empty()).then(|| Example {
                xs: embed(&tokens, table),
                label: label.class_index(),
            })
        })
        .collect()
}

fn confusion(params: &WorthinessParams, examples: &[Example]) -> Result<(Confusion, f64), WorthinessError> {
    let mut predicted = Vec::with_capacity(examples.len());
    let mut actual = Vec::with_capacity(examples.len());
    let mut loss = 0.0;
    for ex in examples {
        let fwd = forward::<ChaCha8Rng>(params, &ex.xs, None);
        loss += cross_entropy(&fwd.logits, ex.label);
        predicted.push(fwd.logits[CLAIM_CLASS] > fwd.logits[1 - CLAIM_CLASS]);
        actual.push(ex.label == CLAIM_CLASS);
    }
    let c = Confusion::from_pairs(&predicted, &actual)?;
    Ok((c, loss / examples.len() as f64))
}

/// Trains `model` in place on labelled sentences. Sentences without word
/// tokens are skipped. The parameters of the epoch with the highest
/// micro-F1 on `validation` (the training set when `None`) are kept.
pub fn train_worthiness(
    model: &mut WorthinessModel,
    data: &[(String, WorthinessLabel)],
    validation: Option<&[(String, WorthinessLabel)]>,
    config: &TrainConfig,
) -> Result<TrainReport, WorthinessError> {
    config.validate()?;
    let examples = prepare(&model.table, data);
    if examples.is_empty() {
        return Err(WorthinessError::Empty);
    }
    let first = examples[0].label;
    if examples.iter().all(|e| e.label == first) {
        return Err(WorthinessError::SingleLabel);
    }
    let held_out = validation.map(|v| prepare(&model.table, v)).filter(|v| !v.is_empty());

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut optimizer = Optimizer::new(config.optimizer, config.learning_rate);
    let hidden = model.params.hidden_dim();
    let dim = model.table.dim();
    let mut grads = WorthinessParams::zeros(dim, hidden);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut report = TrainReport::default();
    let mut best = BestSoFar::new();

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            grads.fill_zero();
            let weight = 1.0 / batch.len() as f64;
            for &i in batch {
                let ex = &examples[i];
                let fwd = forward(&model.params, &ex.xs, Some((config.keep_prob, &mut rng)));
                backward(&model.params, &fwd, ex.label, weight, &mut grads);
            }
            optimizer.step(&mut model.params, &grads);
        }
        let (c, loss) = confusion(&model.params, &examples)?;
        let metric = match &held_out {
            Some(v) => confusion(&model.params, v)?.0.micro_f1(),
            None => c.micro_f1(),
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

/// Claim-class precision/recall and micro-F1 on labelled sentences.
pub fn evaluate_worthiness(
    model: &WorthinessModel,
    data: &[(String, WorthinessLabel)],
) -> Result<WorthinessMetrics, WorthinessError> {
    let examples = prepare(&model.table, data);
    let (c, _) = confusion(&model.params, &examples)?;
    Ok(WorthinessMetrics {
        precision: c.precision(),
        recall: c.recall(),
        micro_f1: c.micro_f1(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub folds: Vec<WorthinessMetrics>,
    pub mean: WorthinessMetrics,
}

/// Seeded k-fold cross-validation. Each fold builds its vocabulary from
/// its own training split and looks embeddings up in `pretrained`.
pub fn cross_validate_worthiness(
    data: &[(String, WorthinessLabel)],
    pretrained: &EmbeddingTable,
    hidden: usize,
    k: usize,
    config: &TrainConfig,
) -> Result<CrossValidation, WorthinessError> {
    let folds = k_fold_indices(data.len(), k, config.seed)?;
    let mut results = Vec::with_capacity(k);
    for (f, held_out) in folds.iter().enumerate() {
        let train_idx = crate::metrics::training_indices(data.len(), held_out);
        let train: Vec<_> = train_idx.iter().map(|&i| data[i].clone()).collect();
        let test: Vec<_> = held_out.iter().map(|&i| data[i].clone()).collect();
        let table = restrict_table(pretrained, &train);
        let mut model = WorthinessModel::new(table, hidden, config.seed.wrapping_add(f as u64));
        train_worthiness(&mut model, &train, None, config)?;
        results.push(evaluate_worthiness(&model, &test)?);
    }
    let n = results.len() as f64;
    let mean = WorthinessMetrics {
        precision: results.iter().map(|m| m.precision).sum::<f64>() / n,
        recall: results.iter().map(|m| m.recall).sum::<f64>() / n,
        micro_f1: results.iter().map(|m| m.micro_f1).sum::<f64>() / n,
    };
    Ok(CrossValidation { folds: results, mean })
}

/// Table over the training split's vocabulary, rows copied from
/// `pretrained` (unknown words get its UNK row).
pub fn restrict_table(pretrained: &EmbeddingTable, data: &[(String, WorthinessLabel)]) -> EmbeddingTable {
    let corpus: Vec<Vec<String>> = data.iter().map(|(s, _)| content_tokens(s)).collect();
    let vocab = build_vocabulary(&corpus, 1);
    let dim = pretrained.dim();
    let mut matrix = ndarray::Array2::zeros((vocab.len(), dim));
    for (id, token) in vocab.tokens().iter().enumerate().skip(1) {
        matrix.row_mut(id).assign(&pretrained.vector(token));
    }
    EmbeddingTable::new(vocab, matrix).expect("shape built from vocabulary")
}
