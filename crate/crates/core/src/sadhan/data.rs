//! On-disk datasets: one directory per example holding `claim.txt`,
//! `label`, an optional `aspects` file of `key=value` lines and
//! `evidence/*.txt`, one file per document.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{SadhanExample, Verdict};
use crate::claim::{AspectKind, Claim};
use crate::text::{build_vocabulary, content_tokens, segment_sentences, EmbeddingTable};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {reason}")]
    Invalid { path: PathBuf, reason: String },
}

fn read(path: &Path) -> Result<String, DatasetError> {
    fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn invalid(path: &Path, reason: impl Into<String>) -> DatasetError {
    DatasetError::Invalid {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>, DatasetError> {
    let io_err = |source| DatasetError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut entries = fs::read_dir(dir)
        .map_err(io_err)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(io_err)?;
    entries.sort();
    Ok(entries)
}

/// Reads the evidence directory of one example: each `*.txt` file becomes
/// a document of segmented sentences.
pub fn load_evidence_dir(dir: &Path) -> Result<Vec<Vec<String>>, DatasetError> {
    let mut docs = Vec::new();
    for path in sorted_entries(dir)? {
        if path.extension().and_then(|e| e.to_str()) != Some("txt") {
            continue;
        }
        let text = read(&path)?;
        docs.push(segment_sentences(&text).into_iter().map(|s| s.text).collect());
    }
    Ok(docs)
}

fn parse_aspects(path: &Path, text: &str, mut claim: Claim) -> Result<Claim, DatasetError> {
    for line in text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
    {
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| invalid(path, format!("expected key=value, got {line:?}")))?;
        let kind: AspectKind = key.parse().map_err(|e: String| invalid(path, e))?;
        let value = value.trim();
        if !value.is_empty() {
            claim = claim.with_aspect(kind, value);
        }
    }
    Ok(claim)
}

pub fn load_example(dir: &Path) -> Result<SadhanExample, DatasetError> {
    let claim_path = dir.join("claim.txt");
    let mut claim = Claim::new(read(&claim_path)?.trim());
    let label_path = dir.join("label");
    let label: Verdict = read(&label_path)?
        .parse()
        .map_err(|e: String| invalid(&label_path, e))?;
    let aspects_path = dir.join("aspects");
    if aspects_path.exists() {
        claim = parse_aspects(&aspects_path, &read(&aspects_path)?, claim)?;
    }
    let documents = load_evidence_dir(&dir.join("evidence"))?;
    Ok(SadhanExample {
        claim,
        documents,
        label,
    })
}

/// Loads every example sub-directory of `root`, in name order.
pub fn load_dataset(root: impl AsRef<Path>) -> Result<Vec<SadhanExample>, DatasetError> {
    sorted_entries(root.as_ref())?
        .into_iter()
        .filter(|p| p.is_dir())
        .map(|p| load_example(&p))
        .collect()
}

/// Writes `data` in the layout [`load_dataset`] reads, one sentence per
/// line in each evidence file.
pub fn write_dataset(root: impl AsRef<Path>, data: &[SadhanExample]) -> io::Result<()> {
    let root = root.as_ref();
    for (i, ex) in data.iter().enumerate() {
        let dir = root.join(format!("example_{i:03}"));
        fs::create_dir_all(dir.join("evidence"))?;
        fs::write(dir.join("claim.txt"), format!("{}\n", ex.claim.text))?;
        fs::write(dir.join("label"), format!("{}\n", ex.label))?;
        let aspects: String = ex.claim.aspects.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
        fs::write(dir.join("aspects"), aspects)?;
        for (d, doc) in ex.documents.iter().enumerate() {
            fs::write(
                dir.join("evidence").join(format!("doc_{d:02}.txt")),
                doc.join("\n") + "\n",
            )?;
        }
    }
    Ok(())
}

const SUBJECTS: &[&str] = &[
    "the senator",
    "the governor",
    "the mayor",
    "the company",
    "the ministry",
    "the report",
    "the agency",
    "the campaign",
];
const PREDICATES: &[&str] = &[
    "cut school funding",
    "doubled the tax rate",
    "closed the factory",
    "raised the minimum wage",
    "banned plastic bags",
    "approved the pipeline",
    "hired new teachers",
    "sold the stadium",
];
const SUPPORT: &[&str] = &[
    "records confirmed the statement as accurate.",
    "official data supports this claim.",
    "independent auditors verified the figures.",
    "the documents show this is correct.",
];
const REFUTE: &[&str] = &[
    "fact checkers debunked this fabricated story.",
    "no record exists and the quote was invented.",
    "the viral post is a misleading hoax.",
    "officials denied it and the image was doctored.",
];
const NEUTRAL: &[&str] = &[
    "the announcement came on a tuesday.",
    "reporters asked several questions afterwards.",
    "the meeting lasted about two hours.",
];
const AUTHORS: &[&str] = &["alice", "bob", "carol"];
const TOPICS: &[&str] = &["economy", "education", "environment"];

/// Deterministic separable toy set of `n` examples (alternating labels)
/// and a random embedding table of width `embed_dim` covering its words.
/// True claims come with supporting evidence, false ones with refuting
/// evidence; both carry neutral filler sentences.
pub fn toy_dataset(n: usize, seed: u64) -> (Vec<SadhanExample>, EmbeddingTable) {
    toy_dataset_with_dim(n, seed, super::SadhanDims::default().embed_dim)
}

pub fn toy_dataset_with_dim(n: usize, seed: u64, embed_dim: usize) -> (Vec<SadhanExample>, EmbeddingTable) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick = |items: &[&'static str]| *items.choose(&mut rng).expect("non-empty");
    let mut data = Vec::with_capacity(n);
    for i in 0..n {
        let label = if i % 2 == 0 { Verdict::True } else { Verdict::False };
        let text = format!("{} {}.", capitalise(pick(SUBJECTS)), pick(PREDICATES));
        let mut claim = Claim::new(text);
        if i % 3 != 2 {
            claim = claim
                .with_aspect(AspectKind::Author, pick(AUTHORS))
                .with_aspect(AspectKind::Topic, pick(TOPICS));
        }
        let cue = if label == Verdict::True { SUPPORT } else { REFUTE };
        let documents = (0..2)
            .map(|_| {
                vec![
                    capitalise(pick(NEUTRAL)),
                    capitalise(pick(cue)),
                    capitalise(pick(NEUTRAL)),
                ]
            })
            .collect();
        data.push(SadhanExample {
            claim,
            documents,
            label,
        });
    }
    let corpus: Vec<Vec<String>> = data
        .iter()
        .flat_map(|ex| {
            std::iter::once(ex.claim.tokens.clone()).chain(ex.documents.iter().flatten().map(|s| content_tokens(s)))
        })
        .collect();
    let table = EmbeddingTable::random(build_vocabulary(&corpus, 1), embed_dim, 0.5, seed ^ 0x5eed);
    (data, table)
}

fn capitalise(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}
