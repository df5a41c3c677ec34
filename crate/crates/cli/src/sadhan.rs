use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Subcommand};
use factcheck_core::nn::OptimizerKind;
use factcheck_core::sadhan::{
    aspect_vocabulary, cross_validate, evaluate, extract_evidence, load_dataset, load_evidence_dir, toy_dataset, train,
    write_dataset, EvidenceSentence, SadhanDims, SadhanExample, SadhanModel, Verdict,
};
use factcheck_core::text::{build_vocabulary, content_tokens, load_embeddings, EmbeddingTable};
use factcheck_core::train::TrainConfig;
use factcheck_core::{AspectKind, Claim};
use serde::{Deserialize, Serialize};

use crate::print_json;

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train on a dataset directory and write a checkpoint.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// JSON file with optional `dims` and `training` sections.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Word vectors for the dataset vocabulary; random rows otherwise.
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// Held-out dataset used to pick the best epoch.
        #[arg(long)]
        validation: Option<PathBuf>,
    },
    /// Score a checkpoint on a dataset, or cross-validate fresh models
    /// with its embeddings and widths when `--folds` is given.
    Eval {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Verdict and evidence for one claim against documents on disk.
    Predict {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        claim: String,
        /// Directory of `*.txt` documents.
        #[arg(long)]
        evidence: PathBuf,
        /// `kind=value`, e.g. `author=Jane Doe`; repeatable.
        #[arg(long = "aspect", value_parser = parse_aspect)]
        aspects: Vec<(AspectKind, String)>,
        #[arg(long)]
        json: bool,
    },
    /// Write a generated toy dataset plus matching word vectors.
    Synth {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Optimiser flags shared by the training subcommands.
#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    #[arg(long, default_value_t = 0.001)]
    lr: f64,
    #[arg(long, default_value_t = 0.3)]
    keep_prob: f64,
    #[arg(long, default_value_t = 8)]
    batch_size: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_parser = parse_optimizer, default_value = "sgd")]
    optimizer: OptimizerKind,
}

impl TrainArgs {
    pub fn config(&self) -> anyhow::Result<TrainConfig> {
        let config = TrainConfig {
            learning_rate: self.lr,
            keep_prob: self.keep_prob,
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed: self.seed,
            optimizer: self.optimizer,
        };
        config.validate()?;
        Ok(config)
    }
}

fn parse_optimizer(s: &str) -> Result<OptimizerKind, String> {
    match s {
        "sgd" => Ok(OptimizerKind::Sgd),
        "adam" => Ok(OptimizerKind::Adam),
        other => Err(format!("unknown optimizer {other:?} (sgd or adam)")),
    }
}

fn parse_aspect(s: &str) -> Result<(AspectKind, String), String> {
    let (k, v) = s.split_once('=').ok_or("expected kind=value")?;
    Ok((k.trim().parse()?, v.trim().to_string()))
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunConfig {
    dims: SadhanDims,
    training: TrainConfig,
}

fn read_config(path: Option<&Path>) -> anyhow::Result<RunConfig> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let config: RunConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    config.training.validate()?;
    Ok(config)
}

fn dataset_table(
    data: &[SadhanExample],
    dim: usize,
    embeddings: Option<&Path>,
    seed: u64,
) -> anyhow::Result<EmbeddingTable> {
    let corpus: Vec<Vec<String>> = data
        .iter()
        .flat_map(|ex| {
            std::iter::once(ex.claim.tokens.clone()).chain(ex.documents.iter().flatten().map(|s| content_tokens(s)))
        })
        .collect();
    let vocab = build_vocabulary(&corpus, 1);
    match embeddings {
        Some(path) => {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            Ok(load_embeddings(BufReader::new(file), &vocab, dim, seed)?)
        }
        None => Ok(EmbeddingTable::random(vocab, dim, 0.5, seed)),
    }
}

#[derive(Serialize)]
struct DocumentReport {
    file: String,
    p_true: f64,
    evidence: Vec<EvidenceSentence>,
}

#[derive(Serialize)]
struct PredictReport {
    claim: String,
    verdict: Verdict,
    score: f64,
    aspect_scores: BTreeMap<AspectKind, f64>,
    documents: Vec<DocumentReport>,
}

fn evidence_files(dir: &Path) -> anyhow::Result<Vec<String>> {
    let mut names: Vec<String> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    names.sort();
    Ok(names)
}

pub fn run(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Train {
            data,
            config,
            out,
            embeddings,
            validation,
        } => {
            let run = read_config(config.as_deref())?;
            let examples = load_dataset(&data)?;
            let held_out = validation.map(load_dataset).transpose()?;
            let mut all = examples.clone();
            all.extend(held_out.iter().flatten().cloned());
            let table = dataset_table(&all, run.dims.embed_dim, embeddings.as_deref(), run.training.seed)?;
            let mut model = SadhanModel::new(table, run.dims, &aspect_vocabulary(&examples), run.training.seed)?;
            let report = train(&mut model, &examples, held_out.as_deref(), &run.training)?;
            model.save(&out)?;
            tracing::info!(best_epoch = report.best_epoch, "saved {}", out.display());
            print_json(&evaluate(&model, &examples)?)
        }
        Command::Eval {
            ckpt,
            data,
            folds,
            config,
        } => {
            let model = SadhanModel::load(&ckpt)?;
            let examples = load_dataset(&data)?;
            match folds {
                Some(k) => {
                    let run = read_config(config.as_deref())?;
                    print_json(&cross_validate(
                        &examples,
                        &model.table,
                        model.dims(),
                        k,
                        &run.training,
                    )?)
                }
                None => print_json(&evaluate(&model, &examples)?),
            }
        }
        Command::Predict {
            ckpt,
            claim,
            evidence,
            aspects,
            json,
        } => {
            let model = SadhanModel::load(&ckpt)?;
            let claim = aspects
                .into_iter()
                .fold(Claim::new(claim), |c, (k, v)| c.with_aspect(k, v));
            let docs = load_evidence_dir(&evidence)?;
            let files = evidence_files(&evidence)?;
            if docs.is_empty() {
                bail!("no .txt documents in {}", evidence.display());
            }
            let result = model.predict(&claim, &docs)?;
            let report = PredictReport {
                claim: claim.text.clone(),
                verdict: result.verdict,
                score: result.score,
                aspect_scores: result.aspect_probabilities.iter().map(|(k, p)| (*k, p[0])).collect(),
                documents: result
                    .documents
                    .iter()
                    .map(|d| DocumentReport {
                        file: files.get(d.index).cloned().unwrap_or_default(),
                        p_true: d.probabilities[0],
                        evidence: extract_evidence(&d.attention, &docs[d.index]),
                    })
                    .collect(),
            };
            if json {
                return print_json(&report);
            }
            println!("{}\t{:.4}\t{}", report.verdict, report.score, report.claim);
            for d in &report.documents {
                println!("  {} p_true={:.4}", d.file, d.p_true);
                for e in &d.evidence {
                    println!("    [{:.2}] {}", e.intensity, e.text);
                }
            }
            Ok(())
        }
        Command::Synth { n, seed, out } => {
            let (data, table) = toy_dataset(n, seed);
            write_dataset(out.join("data"), &data)?;
            let mut vectors = String::new();
            for (id, token) in table.vocab().tokens().iter().enumerate().skip(2) {
                let row: Vec<String> = table.row(id).iter().map(|x| format!("{x:.6}")).collect();
                vectors.push_str(&format!("{token} {}\n", row.join(" ")));
            }
            std::fs::write(out.join("embeddings.txt"), vectors)?;
            Ok(())
        }
    }
}
