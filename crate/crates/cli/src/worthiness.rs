use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Subcommand};
use factcheck_core::retrieval::Article;
use factcheck_core::text::{build_vocabulary, content_tokens, EmbeddingTable};
use factcheck_core::worthiness::{
    cross_validate_worthiness, evaluate_worthiness, rank_claims, read_tsv, restrict_table, synthetic_corpus,
    train_worthiness, write_tsv, WorthinessLabel, WorthinessModel, DEFAULT_HIDDEN,
};
use serde::Serialize;

use crate::sadhan::TrainArgs;
use crate::{print_json, text_or_file};

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train on a TSV of `sentence<TAB>claim|non-claim` rows.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Rank the sentences of an article by check-worthiness.
    Score {
        #[arg(long)]
        model: PathBuf,
        /// Article text, or a path to a text file.
        #[arg(long)]
        text: String,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long, default_value_t = 5)]
        top_k: usize,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a model on a TSV, or cross-validate fresh models with `--folds`.
    Eval {
        #[arg(long, required_unless_present = "folds")]
        model: Option<PathBuf>,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        folds: Option<usize>,
        #[command(flatten)]
        model_args: ModelArgs,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Write a generated, separable corpus as TSV.
    Synth {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Pretrained word vectors; rows are copied for the training vocabulary.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Width of random word vectors when no embeddings are given.
    #[arg(long, default_value_t = 50)]
    dim: usize,
    #[arg(long, default_value_t = DEFAULT_HIDDEN)]
    hidden: usize,
}

impl ModelArgs {
    fn table(&self, data: &[(String, WorthinessLabel)], seed: u64) -> anyhow::Result<EmbeddingTable> {
        match &self.embeddings {
            Some(path) => {
                let pretrained = factcheck_service::load_word_vectors(path)
                    .map_err(anyhow::Error::msg)
                    .with_context(|| format!("loading {}", path.display()))?;
                Ok(restrict_table(&pretrained, data))
            }
            None => {
                let corpus: Vec<Vec<String>> = data.iter().map(|(s, _)| content_tokens(s)).collect();
                Ok(EmbeddingTable::random(
                    build_vocabulary(&corpus, 1),
                    self.dim,
                    0.5,
                    seed,
                ))
            }
        }
    }
}

fn read_data(path: &PathBuf) -> anyhow::Result<Vec<(String, WorthinessLabel)>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(read_tsv(&text)?)
}

#[derive(Serialize)]
struct ScoreRow<'a> {
    rank: usize,
    index: usize,
    score: f64,
    sentence: &'a str,
}

pub fn run(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Train {
            data,
            out,
            model,
            train,
        } => {
            let rows = read_data(&data)?;
            let config = train.config()?;
            let mut m = WorthinessModel::new(model.table(&rows, config.seed)?, model.hidden, config.seed);
            let report = train_worthiness(&mut m, &rows, None, &config)?;
            m.save(&out)?;
            let metrics = evaluate_worthiness(&m, &rows)?;
            tracing::info!(
                best_epoch = report.best_epoch,
                micro_f1 = metrics.micro_f1,
                "saved {}",
                out.display()
            );
            print_json(&metrics)
        }
        Command::Score {
            model,
            text,
            threshold,
            top_k,
            json,
        } => {
            if !(0.0..=1.0).contains(&threshold) {
                bail!("--threshold must lie in [0, 1]");
            }
            let m = WorthinessModel::load(&model)?;
            let article = Article::from_text("", "", &text_or_file(&text)?);
            let ranked = rank_claims(&m, &article, threshold, top_k);
            let rows: Vec<ScoreRow> = ranked
                .iter()
                .enumerate()
                .map(|(i, s)| ScoreRow {
                    rank: i + 1,
                    index: s.sentence.index,
                    score: s.score,
                    sentence: &s.sentence.text,
                })
                .collect();
            if json {
                return print_json(&rows);
            }
            for r in rows {
                println!("{}\t{:.4}\t{}", r.rank, r.score, r.sentence);
            }
            Ok(())
        }
        Command::Eval {
            model,
            data,
            folds,
            model_args,
            train,
        } => {
            let rows = read_data(&data)?;
            match folds {
                Some(k) => {
                    let config = train.config()?;
                    let pretrained = model_args.table(&rows, config.seed)?;
                    print_json(&cross_validate_worthiness(
                        &rows,
                        &pretrained,
                        model_args.hidden,
                        k,
                        &config,
                    )?)
                }
                None => {
                    let m = WorthinessModel::load(model.expect("required by clap"))?;
                    print_json(&evaluate_worthiness(&m, &rows)?)
                }
            }
        }
        Command::Synth { n, seed, out } => {
            std::fs::write(&out, write_tsv(&synthetic_corpus(n, seed)))
                .with_context(|| format!("writing {}", out.display()))?;
            Ok(())
        }
    }
}
