//! Hand-written recurrent and attention layers with explicit backward passes.
//!
//! Every layer exposes a `*_forward` function returning its output plus a
//! trace of intermediate values, and a matching `*_backward` that consumes
//! the trace, accumulates parameter gradients into a tensor set of the same
//! shape as the parameters, and returns the gradient with respect to its
//! inputs.

mod attention;
mod dropout;
pub mod gradcheck;
mod lstm;
mod optim;

pub use attention::{attention_backward, attention_forward, conditioned_attention, AttentionParams, AttentionTrace};
pub use dropout::DropoutMask;
pub use lstm::{
    bilstm_backward, bilstm_encode, bilstm_forward, lstm_backward, lstm_cell_forward, lstm_forward, BiLstmParams,
    BiLstmTrace, LstmParams, LstmTrace,
};
pub use optim::{Optimizer, OptimizerKind};

use ndarray::{Array1, Array2, ArrayBase, ArrayView1, ArrayViewD, ArrayViewMutD, Data, Ix1};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NnError {
    #[error("{what}: expected dimension {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{0}: empty sequence")]
    EmptySequence(&'static str),
}

/// A named collection of parameter tensors.
///
/// Gradients use the same type as the parameters, so optimizers, the
/// checkpoint writer and the finite-difference harness can walk any model
/// generically. Implementations must return tensors in a fixed order with
/// standard (row-major, contiguous) layout.
pub trait ParamTensors {
    fn tensors(&self) -> Vec<(String, ArrayViewD<'_, f64>)>;
    fn tensors_mut(&mut self) -> Vec<(String, ArrayViewMutD<'_, f64>)>;

    fn fill_zero(&mut self) {
        for (_, mut t) in self.tensors_mut() {
            t.fill(0.0);
        }
    }

    fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    fn all_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.iter().all(|v| v.is_finite()))
    }
}

pub(crate) fn prefixed<'a, T>(prefix: &str, items: Vec<(String, T)>) -> impl Iterator<Item = (String, T)> + 'a
where
    T: 'a,
{
    let prefix = prefix.to_string();
    items.into_iter().map(move |(n, t)| (format!("{prefix}.{n}"), t))
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable softmax.
pub fn softmax<S: Data<Elem = f64>>(x: &ArrayBase<S, Ix1>) -> Array1<f64> {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp = x.mapv(|v| (v - max).exp());
    let sum = exp.sum();
    exp / sum
}

/// Two-class softmax returning `(p0, 1 - p0)` so the pair sums to one
/// exactly.
pub fn softmax2(logits: ArrayView1<'_, f64>) -> [f64; 2] {
    let p0 = sigmoid(logits[0] - logits[1]);
    [p0, 1.0 - p0]
}

pub(crate) fn uniform_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, bound: f64) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.gen_range(-bound..=bound))
}

pub(crate) fn uniform_vector<R: Rng>(rng: &mut R, len: usize, bound: f64) -> Array1<f64> {
    Array1::from_shape_simple_fn(len, || rng.gen_range(-bound..=bound))
}

/// Cross-entropy of `label` under `logits`, computed through log-sum-exp.
pub fn cross_entropy(logits: &Array1<f64>, label: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    lse - logits[label]
}

/// Mean of rows.
pub fn mean_rows(m: &Array2<f64>) -> Array1<f64> {
    let n = m.nrows().max(1) as f64;
    m.sum_axis(ndarray::Axis(0)) / n
}
