use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ArrayViewD, ArrayViewMutD, Axis};
use rand::Rng;

use super::{softmax, uniform_matrix, uniform_vector, ParamTensors};

/// Additive attention conditioned on a claim vector and an aspect vector:
/// `e_j = v · tanh(W_h s_j + W_c c + W_a a + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams {
    /// `k × m` (state width m)
    pub w_h: Array2<f64>,
    /// `k × c` (claim width c)
    pub w_c: Array2<f64>,
    /// `k × d_a` (aspect width)
    pub w_a: Array2<f64>,
    pub b: Array1<f64>,
    pub v: Array1<f64>,
}

impl AttentionParams {
    pub fn zeros(state: usize, claim: usize, aspect: usize, attn: usize) -> Self {
        Self {
            w_h: Array2::zeros((attn, state)),
            w_c: Array2::zeros((attn, claim)),
            w_a: Array2::zeros((attn, aspect)),
            b: Array1::zeros(attn),
            v: Array1::zeros(attn),
        }
    }

    pub fn init<R: Rng>(state: usize, claim: usize, aspect: usize, attn: usize, rng: &mut R) -> Self {
        let fan_in = (state + claim + aspect).max(1) as f64;
        let bound = (6.0 / (fan_in + attn as f64)).sqrt();
        Self {
            w_h: uniform_matrix(rng, attn, state, bound),
            w_c: uniform_matrix(rng, attn, claim, bound),
            w_a: uniform_matrix(rng, attn, aspect, bound),
            b: Array1::zeros(attn),
            v: uniform_vector(rng, attn, (3.0 / attn as f64).sqrt()),
        }
    }

    pub fn state_dim(&self) -> usize {
        self.w_h.ncols()
    }
}

impl ParamTensors for AttentionParams {
    fn tensors(&self) -> Vec<(String, ArrayViewD<'_, f64>)> {
        vec![
            ("w_h".into(), self.w_h.view().into_dyn()),
            ("w_c".into(), self.w_c.view().into_dyn()),
            ("w_a".into(), self.w_a.view().into_dyn()),
            ("b".into(), self.b.view().into_dyn()),
            ("v".into(), self.v.view().into_dyn()),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<(String, ArrayViewMutD<'_, f64>)> {
        vec![
            ("w_h".into(), self.w_h.view_mut().into_dyn()),
            ("w_c".into(), self.w_c.view_mut().into_dyn()),
            ("w_a".into(), self.w_a.view_mut().into_dyn()),
            ("b".into(), self.b.view_mut().into_dyn()),
            ("v".into(), self.v.view_mut().into_dyn()),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct AttentionTrace {
    states: Array2<f64>,
    claim: Array1<f64>,
    aspect: Array1<f64>,
    /// `N × k` tanh activations.
    act: Array2<f64>,
    pub weights: Array1<f64>,
}

/// Returns the attention-weighted sum of `states` rows and the trace.
pub fn attention_forward(
    states: ArrayView2<'_, f64>,
    claim: ArrayView1<'_, f64>,
    aspect: ArrayView1<'_, f64>,
    p: &AttentionParams,
) -> (Array1<f64>, AttentionTrace) {
    let query = p.w_c.dot(&claim) + p.w_a.dot(&aspect) + &p.b;
    let mut act = states.dot(&p.w_h.t());
    act += &query.view().insert_axis(Axis(0));
    act.mapv_inplace(f64::tanh);
    let scores = act.dot(&p.v);
    let weights = softmax(&scores);
    let context = states.t().dot(&weights);
    (
        context,
        AttentionTrace {
            states: states.to_owned(),
            claim: claim.to_owned(),
            aspect: aspect.to_owned(),
            act,
            weights,
        },
    )
}

/// `(context, weights)` without keeping the trace.
pub fn conditioned_attention(
    states: ArrayView2<'_, f64>,
    claim: ArrayView1<'_, f64>,
    aspect: ArrayView1<'_, f64>,
    p: &AttentionParams,
) -> (Array1<f64>, Array1<f64>) {
    let (ctx, trace) = attention_forward(states, claim, aspect, p);
    (ctx, trace.weights)
}

/// Returns gradients for `(states, claim, aspect)`.
pub fn attention_backward(
    trace: &AttentionTrace,
    d_context: ArrayView1<'_, f64>,
    p: &AttentionParams,
    grads: &mut AttentionParams,
) -> (Array2<f64>, Array1<f64>, Array1<f64>) {
    let w = &trace.weights;
    // context = Σ w_j s_j
    let mut d_states = w.view().insert_axis(Axis(1)).dot(&d_context.insert_axis(Axis(0)));
    let d_w = trace.states.dot(&d_context);
    let inner = w.dot(&d_w);
    let d_scores = w * &d_w.mapv(|x| x - inner);

    // scores = act · v
    grads.v += &trace.act.t().dot(&d_scores);
    let d_act = d_scores
        .view()
        .insert_axis(Axis(1))
        .dot(&p.v.view().insert_axis(Axis(0)));
    let d_pre = d_act * &trace.act.mapv(|a| 1.0 - a * a);

    grads.w_h += &d_pre.t().dot(&trace.states);
    d_states += &d_pre.dot(&p.w_h);

    let d_query = d_pre.sum_axis(Axis(0));
    let dq_col = d_query.view().insert_axis(Axis(1));
    grads.w_c += &dq_col.dot(&trace.claim.view().insert_axis(Axis(0)));
    grads.w_a += &dq_col.dot(&trace.aspect.view().insert_axis(Axis(0)));
    grads.b += &d_query;
    let d_claim = p.w_c.t().dot(&d_query);
    let d_aspect = p.w_a.t().dot(&d_query);
    (d_states, d_claim, d_aspect)
}
