//! Reference implementations shared by test binaries. Nothing here calls
//! into the code under test beyond reading parameters and fixtures.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::PathBuf;

use factcheck_core::nn::{AttentionParams, BiLstmParams, LstmParams};
use factcheck_core::retrieval::{
    extract_article, Article, FixtureIndex, SearchBackend, SearchResult, SNIPPET_THRESHOLD,
};
use factcheck_core::sadhan::SadhanModel;
use factcheck_core::text::{content_tokens, EmbeddingTable};
use factcheck_core::{AspectKind, Claim};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture_table() -> EmbeddingTable {
    let f = File::open(fixtures().join("embeddings.txt")).unwrap();
    EmbeddingTable::from_word_vectors(BufReader::new(f), 16, 1).unwrap()
}

pub type Vector = Vec<f64>;

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn at(m: &ndarray::Array2<f64>, i: usize, j: usize) -> f64 {
    m[[i, j]]
}

/// Unidirectional LSTM, one scalar at a time.
pub fn lstm(xs: &[Vector], p: &LstmParams) -> Vec<Vector> {
    let h = p.u.ncols();
    let d = p.w.ncols();
    let mut hp = vec![0.0; h];
    let mut cp = vec![0.0; h];
    let mut out = Vec::new();
    for x in xs {
        let mut z = vec![0.0; 4 * h];
        for r in 0..4 * h {
            let mut acc = p.b[r];
            for j in 0..d {
                acc += at(&p.w, r, j) * x[j];
            }
            for j in 0..h {
                acc += at(&p.u, r, j) * hp[j];
            }
            z[r] = acc;
        }
        let mut hn = vec![0.0; h];
        let mut cn = vec![0.0; h];
        for k in 0..h {
            let i = sig(z[k]);
            let f = sig(z[h + k]);
            let g = z[2 * h + k].tanh();
            let o = sig(z[3 * h + k]);
            cn[k] = f * cp[k] + i * g;
            hn[k] = o * cn[k].tanh();
        }
        out.push(hn.clone());
        hp = hn;
        cp = cn;
    }
    out
}

pub fn bilstm(xs: &[Vector], p: &BiLstmParams) -> Vec<Vector> {
    let fwd = lstm(xs, &p.fwd);
    let rev: Vec<Vector> = xs.iter().rev().cloned().collect();
    let mut bwd = lstm(&rev, &p.bwd);
    bwd.reverse();
    fwd.into_iter()
        .zip(bwd)
        .map(|(mut f, b)| {
            f.extend(b);
            f
        })
        .collect()
}

pub fn softmax(xs: &[f64]) -> Vector {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vector = xs.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|x| x / s).collect()
}

pub fn attend(states: &[Vector], c: &[f64], a: &[f64], p: &AttentionParams) -> (Vector, Vector) {
    let k = p.b.len();
    let scores: Vector = states
        .iter()
        .map(|s| {
            let mut e = 0.0;
            for r in 0..k {
                let mut u = p.b[r];
                for (j, x) in s.iter().enumerate() {
                    u += at(&p.w_h, r, j) * x;
                }
                for (j, x) in c.iter().enumerate() {
                    u += at(&p.w_c, r, j) * x;
                }
                for (j, x) in a.iter().enumerate() {
                    u += at(&p.w_a, r, j) * x;
                }
                e += p.v[r] * u.tanh();
            }
            e
        })
        .collect();
    let w = softmax(&scores);
    let mut ctx = vec![0.0; states[0].len()];
    for (s, wi) in states.iter().zip(&w) {
        for (c, x) in ctx.iter_mut().zip(s) {
            *c += wi * x;
        }
    }
    (ctx, w)
}

pub struct Oracle {
    pub probabilities: [f64; 2],
    pub sentence_weights: Vector,
    pub word_weights: Vec<Vector>,
}

pub fn oracle(model: &SadhanModel, claim: &Claim, sentences: &[Vec<&str>], kind: AspectKind) -> Oracle {
    let p = &model.params;
    let rows = |tokens: &[&str]| -> Vec<Vector> { tokens.iter().map(|t| model.table.vector(t).to_vec()).collect() };
    let claim_tokens: Vec<&str> = claim.tokens.iter().map(String::as_str).collect();
    let hs = bilstm(&rows(&claim_tokens), &p.claim_encoder);
    let mut c = vec![0.0; hs[0].len()];
    for h in &hs {
        for (a, b) in c.iter_mut().zip(h) {
            *a += b / hs.len() as f64;
        }
    }
    let table = p.aspects.get(kind);
    let row = table.row_index(claim.aspects.get(&kind).map(String::as_str));
    let a: Vector = table.row(row).to_vec();

    let mut sent_vecs = Vec::new();
    let mut word_weights = Vec::new();
    for s in sentences {
        let (v, w) = attend(&bilstm(&rows(s), &p.word_encoder), &c, &a, &p.word_attention);
        sent_vecs.push(v);
        word_weights.push(w);
    }
    let (doc, sentence_weights) = attend(&bilstm(&sent_vecs, &p.sentence_encoder), &c, &a, &p.sentence_attention);
    let features: Vector = doc.iter().chain(&c).copied().collect();
    let mut logits = [p.b_f[0], p.b_f[1]];
    for (r, l) in logits.iter_mut().enumerate() {
        for (j, x) in features.iter().enumerate() {
            *l += at(&p.w_f, r, j) * x;
        }
    }
    let pr = softmax(&logits);
    Oracle {
        probabilities: [pr[0], pr[1]],
        sentence_weights,
        word_weights,
    }
}

pub fn raw_vectors() -> HashMap<String, Vec<f64>> {
    fs::read_to_string(fixtures().join("embeddings.txt"))
        .unwrap()
        .lines()
        .map(|l| {
            let mut it = l.split(' ');
            let w = it.next().unwrap().to_string();
            (w, it.map(|x| x.parse().unwrap()).collect())
        })
        .collect()
}

pub fn corpus_articles() -> Vec<Article> {
    let index = FixtureIndex::open(fixtures().join("corpus")).unwrap();
    let names: Vec<String> = index.filenames().map(str::to_string).collect();
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(fixtures().join("corpus/manifest.json")).unwrap()).unwrap();
    names
        .iter()
        .map(|n| {
            let url = manifest[n]["url"].as_str().unwrap();
            let html = index.fetch(url).unwrap();
            extract_article(&SearchResult {
                url: url.into(),
                title: String::new(),
                raw_html: html,
                rank: 1,
            })
            .unwrap()
        })
        .collect()
}

/// Scores every sentence independently, keeps those strictly above the
/// threshold and joins runs of consecutive kept positions.
pub fn brute_force(
    claim_tokens: &[String],
    article: &Article,
    vectors: &HashMap<String, Vec<f64>>,
    unk: &[f64],
) -> Vec<(usize, usize, String, f64)> {
    let mean = |tokens: &[String]| -> Vec<f64> {
        let mut v = vec![0.0; unk.len()];
        for t in tokens {
            let row = vectors.get(t).map(Vec::as_slice).unwrap_or(unk);
            for (a, b) in v.iter_mut().zip(row) {
                *a += b;
            }
        }
        if !tokens.is_empty() {
            v.iter_mut().for_each(|a| *a /= tokens.len() as f64);
        }
        v
    };
    let cos = |a: &[f64], b: &[f64]| {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            0.0
        } else {
            (dot / (na * nb)).clamp(-1.0, 1.0)
        }
    };
    let c = mean(claim_tokens);
    let scores: Vec<f64> = article
        .sentences
        .iter()
        .map(|s| cos(&c, &mean(&content_tokens(&s.text))))
        .collect();
    let mut out: Vec<(usize, usize, String, f64)> = Vec::new();
    for (i, &sc) in scores.iter().enumerate() {
        if sc <= SNIPPET_THRESHOLD {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.1 + 1 == i => {
                last.1 = i;
                last.2 = format!("{} {}", last.2, article.sentences[i].text);
                last.3 = last.3.max(sc);
            }
            _ => out.push((i, i, article.sentences[i].text.clone(), sc)),
        }
    }
    out
}
