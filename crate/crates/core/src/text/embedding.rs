use std::io::BufRead;

use ndarray::{Array1, Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::vocab::{Vocabulary, PAD_ID};

/// Rows for tokens missing from the vector file are drawn from
/// `[-OOV_INIT_BOUND, OOV_INIT_BOUND]`.
pub const OOV_INIT_BOUND: f64 = 0.05;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("line {line}: expected {expected} values after the token, found {found}")]
    Arity { line: usize, expected: usize, found: usize },
    #[error("line {line}: value {value:?} is not a number")]
    NotNumeric { line: usize, value: String },
    #[error("embedding dimension must be positive")]
    ZeroDimension,
    #[error("row count {rows} does not match vocabulary size {vocab}")]
    Shape { rows: usize, vocab: usize },
    #[error("reading word vectors: {0}")]
    Io(#[from] std::io::Error),
}

/// Word-vector matrix aligned with a vocabulary; row `PAD_ID` is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    vocab: Vocabulary,
    matrix: Array2<f64>,
}

impl EmbeddingTable {
    pub fn new(vocab: Vocabulary, matrix: Array2<f64>) -> Result<Self, EmbeddingError> {
        if matrix.nrows() != vocab.len() {
            return Err(EmbeddingError::Shape {
                rows: matrix.nrows(),
                vocab: vocab.len(),
            });
        }
        if matrix.ncols() == 0 {
            return Err(EmbeddingError::ZeroDimension);
        }
        let mut matrix = matrix;
        matrix.row_mut(PAD_ID).fill(0.0);
        Ok(Self { vocab, matrix })
    }

    /// Every non-PAD row uniform in `[-bound, bound]`.
    pub fn random(vocab: Vocabulary, dim: usize, bound: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut matrix = Array2::zeros((vocab.len(), dim));
        for (i, mut row) in matrix.rows_mut().into_iter().enumerate() {
            if i != PAD_ID {
                row.mapv_inplace(|_| rng.gen_range(-bound..=bound));
            }
        }
        Self { vocab, matrix }
    }

    /// Builds the vocabulary from the file itself (file order) and loads
    /// every vector in it.
    pub fn from_word_vectors<R: BufRead>(source: R, dim: usize, seed: u64) -> Result<Self, EmbeddingError> {
        let entries = parse_word_vectors(source, dim)?;
        let vocab = Vocabulary::from_tokens(entries.iter().map(|(t, _)| t.clone()));
        Ok(fill_table(vocab, dim, entries, seed))
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn row(&self, id: usize) -> ArrayView1<'_, f64> {
        self.matrix.row(id)
    }

    /// Row for `token`, falling back to the UNK row.
    pub fn vector(&self, token: &str) -> ArrayView1<'_, f64> {
        self.matrix.row(self.vocab.lookup(token))
    }
}

fn parse_word_vectors<R: BufRead>(source: R, dim: usize) -> Result<Vec<(String, Array1<f64>)>, EmbeddingError> {
    if dim == 0 {
        return Err(EmbeddingError::ZeroDimension);
    }
    let mut entries = Vec::new();
    for (n, line) in source.lines().enumerate() {
        let line = line?;
        let line_no = n + 1;
        let mut fields = line.split(' ').filter(|f| !f.is_empty());
        let Some(token) = fields.next() else {
            continue;
        };
        let values: Vec<&str> = fields.collect();
        if values.len() != dim {
            return Err(EmbeddingError::Arity {
                line: line_no,
                expected: dim,
                found: values.len(),
            });
        }
        let mut vec = Array1::zeros(dim);
        for (slot, raw) in vec.iter_mut().zip(&values) {
            *slot = raw.parse::<f64>().map_err(|_| EmbeddingError::NotNumeric {
                line: line_no,
                value: raw.to_string(),
            })?;
        }
        entries.push((token.to_string(), vec));
    }
    Ok(entries)
}

fn fill_table(vocab: Vocabulary, dim: usize, entries: Vec<(String, Array1<f64>)>, seed: u64) -> EmbeddingTable {
    let mut table = EmbeddingTable::random(vocab, dim, OOV_INIT_BOUND, seed);
    let mut seen = vec![false; table.vocab.len()];
    for (token, vec) in entries {
        if let Some(id) = table.vocab.id_of(&token) {
            if id != PAD_ID && !seen[id] {
                table.matrix.row_mut(id).assign(&vec);
                seen[id] = true;
            }
        }
    }
    table
}

/// Loads rows for `vocab` from a whitespace-separated word-vector stream.
///
/// Tokens absent from the stream keep a seeded uniform initialisation in
/// `[-0.05, 0.05]`; the PAD row is zero. Every line is validated, including
/// lines for tokens outside the vocabulary.
pub fn load_embeddings<R: BufRead>(
    source: R,
    vocab: &Vocabulary,
    dim: usize,
    seed: u64,
) -> Result<EmbeddingTable, EmbeddingError> {
    let entries = parse_word_vectors(source, dim)?;
    Ok(fill_table(vocab.clone(), dim, entries, seed))
}

/// Stacks the table rows for `tokens`; unknown tokens map to the UNK row.
pub fn embed<S: AsRef<str>>(tokens: &[S], table: &EmbeddingTable) -> Array2<f64> {
    let mut out = Array2::zeros((tokens.len(), table.dim()));
    for (mut row, t) in out.rows_mut().into_iter().zip(tokens) {
        row.assign(&table.vector(t.as_ref()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{build_vocabulary, UNK_ID};

    fn line(token: &str, first: f64, dim: usize) -> String {
        let mut s = format!("{token} {first}");
        for i in 1..dim {
            s.push_str(&format!(" {}", i as f64 / 1000.0));
        }
        s
    }

    fn vocab(tokens: &[&str]) -> Vocabulary {
        Vocabulary::from_tokens(tokens.iter().copied())
    }

    #[test]
    fn copies_rows_from_stream() {
        let src = format!("{}\n{}\n", line("cat", 0.1, 100), line("dog", -0.4, 100));
        let t = load_embeddings(src.as_bytes(), &vocab(&["cat"]), 100, 7).unwrap();
        let id = t.vocab().id_of("cat").unwrap();
        assert_eq!(t.row(id)[0], 0.1);
        assert_eq!(t.row(id)[99], 0.099);
        assert_eq!(t.matrix().nrows(), 3);
    }

    #[test]
    fn oov_rows_are_bounded_and_pad_is_zero() {
        let src = line("cat", 0.1, 100);
        let t = load_embeddings(src.as_bytes(), &vocab(&["cat", "bird"]), 100, 7).unwrap();
        let bird = t.row(t.vocab().id_of("bird").unwrap());
        assert!(bird.iter().all(|v| v.abs() <= OOV_INIT_BOUND));
        assert!(bird.iter().any(|v| *v != 0.0));
        assert!(t.row(PAD_ID).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn arity_error_names_line() {
        let src = format!("{}\ncat 0.1 0.2\n", line("dog", 0.0, 100));
        let err = load_embeddings(src.as_bytes(), &vocab(&["cat"]), 100, 1).unwrap_err();
        assert!(matches!(err, EmbeddingError::Arity { line: 2, found: 2, .. }), "{err}");
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn non_numeric_error_names_line() {
        let err = load_embeddings("cat 0.1 x".as_bytes(), &vocab(&["cat"]), 2, 1).unwrap_err();
        assert!(matches!(err, EmbeddingError::NotNumeric { line: 1, .. }));
    }

    #[test]
    fn seeded_init_is_reproducible() {
        let v = vocab(&["a", "b"]);
        let a = load_embeddings("".as_bytes(), &v, 4, 3).unwrap();
        let b = load_embeddings("".as_bytes(), &v, 4, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn embed_rows() {
        let src = "cat 1 2\ndog 3 4\n";
        let v = build_vocabulary(&[vec!["cat", "dog"]], 1);
        let t = load_embeddings(src.as_bytes(), &v, 2, 0).unwrap();
        let m = embed(&["dog", "zebra", "cat"], &t);
        assert_eq!(m.shape(), &[3, 2]);
        assert_eq!(m.row(0).to_vec(), vec![3.0, 4.0]);
        assert_eq!(m.row(1), t.row(UNK_ID));
        assert_eq!(m.row(2).to_vec(), vec![1.0, 2.0]);
        assert_eq!(embed::<&str>(&[], &t).shape(), &[0, 2]);
    }

    #[test]
    fn vocabulary_from_file() {
        let t = EmbeddingTable::from_word_vectors("b 1 0\na 0 1\n".as_bytes(), 2, 0).unwrap();
        assert_eq!(t.vocab().tokens(), ["<pad>", "<unk>", "b", "a"]);
        assert_eq!(t.vector("a").to_vec(), vec![0.0, 1.0]);
    }
}
