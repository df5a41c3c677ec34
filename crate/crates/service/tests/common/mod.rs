//! Fixture models and helpers shared by the service test binaries.

#![allow(dead_code)]

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use factcheck_core::nn::OptimizerKind;
use factcheck_core::retrieval::FixtureIndex;
use factcheck_core::sadhan::{aspect_vocabulary, load_dataset, train, SadhanDims, SadhanModel};
use factcheck_core::text::{build_vocabulary, content_tokens, EmbeddingTable};
use factcheck_core::train::TrainConfig;
use factcheck_core::worthiness::{synthetic_corpus, train_worthiness, WorthinessModel};
use factcheck_service::{Service, ServiceParts};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture_table() -> EmbeddingTable {
    let f = File::open(fixtures().join("embeddings.txt")).unwrap();
    EmbeddingTable::from_word_vectors(BufReader::new(f), 16, 1).unwrap()
}

pub fn planted_article() -> String {
    std::fs::read_to_string(fixtures().join("articles/planted_claim.txt")).unwrap()
}

/// SADHAN trained briefly on the fixture dataset, using the fixture word
/// vectors.
pub fn train_sadhan() -> SadhanModel {
    let data = load_dataset(fixtures().join("sadhan_toy")).unwrap();
    let mut model = SadhanModel::new(fixture_table(), SadhanDims::default(), &aspect_vocabulary(&data), 17).unwrap();
    let config = TrainConfig {
        epochs: 5,
        optimizer: OptimizerKind::Adam,
        ..Default::default()
    };
    train(&mut model, &data, None, &config).unwrap();
    model
}

/// Check-worthiness LSTM trained on synthetic statements versus remarks.
pub fn train_worthiness_model() -> WorthinessModel {
    let data = synthetic_corpus(80, 21);
    let mut corpus: Vec<Vec<String>> = data.iter().map(|(s, _)| content_tokens(s)).collect();
    corpus.push(content_tokens(&planted_article()));
    let table = EmbeddingTable::random(build_vocabulary(&corpus, 1), 16, 0.5, 3);
    let mut model = WorthinessModel::new(table, 16, 5);
    let config = TrainConfig {
        epochs: 15,
        learning_rate: 0.01,
        optimizer: OptimizerKind::Adam,
        ..Default::default()
    };
    train_worthiness(&mut model, &data, None, &config).unwrap();
    model
}

pub fn models() -> &'static (SadhanModel, WorthinessModel) {
    static MODELS: OnceLock<(SadhanModel, WorthinessModel)> = OnceLock::new();
    MODELS.get_or_init(|| (train_sadhan(), train_worthiness_model()))
}

pub fn fixture_backend() -> Arc<FixtureIndex> {
    Arc::new(FixtureIndex::open(fixtures().join("corpus")).unwrap())
}

/// A fully loaded service logging feedback to `log`.
pub fn service(log: &Path) -> Service {
    let (sadhan, worthiness) = models();
    Service::new(ServiceParts {
        backend: fixture_backend(),
        sadhan: Some(sadhan.clone()),
        worthiness: Some(worthiness.clone()),
        filter_table: Some(fixture_table()),
        feedback_log: log.to_path_buf(),
        missing: Vec::new(),
    })
    .unwrap()
}

/// First body sentence of a corpus page, used as a claim that matches the
/// page verbatim.
pub fn verbatim_claim(page: &str) -> String {
    let html = std::fs::read_to_string(fixtures().join("corpus").join(page)).unwrap();
    let start = html.find("<article>").unwrap();
    let p = html[start..].find("<p>").unwrap() + start + 3;
    let body = &html[p..];
    let end = body
        .find(". ")
        .map(|i| i + 1)
        .unwrap_or_else(|| body.find("</p>").unwrap());
    body[..end].to_string()
}

/// Claims used for fixture-wide checks: one verbatim sentence per topic
/// page plus paraphrases.
pub fn fixture_claims() -> Vec<String> {
    let mut claims: Vec<String> = [
        "economy_01.html",
        "health_02.html",
        "climate_03.html",
        "education_04.html",
        "crime_05.html",
        "immigration_06.html",
        "housing_07.html",
        "transport_01.html",
    ]
    .iter()
    .map(|p| verbatim_claim(p))
    .collect();
    claims.extend(
        [
            "Unemployment fell and wages rose for workers.",
            "The vaccine reduced hospital visits for patients.",
            "Carbon emissions from coal are warming the climate.",
            "Rent and mortgage costs push tenants out of housing.",
        ]
        .map(String::from),
    );
    claims
}
