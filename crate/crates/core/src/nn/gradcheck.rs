//! Central finite-difference checks for analytic gradients.

use super::ParamTensors;

/// Comparison of one parameter tensor's analytic and numeric gradients.
#[derive(Debug, Clone)]
pub struct TensorCheck {
    pub name: String,
    pub len: usize,
    /// `‖analytic − numeric‖ / max(‖analytic‖, ‖numeric‖)`, or 0 when both
    /// gradients are exactly zero.
    pub relative_error: f64,
    pub max_abs_diff: f64,
    pub analytic_norm: f64,
    pub numeric_norm: f64,
}

/// Perturbs every element of every tensor by `±eps` and compares
/// `(L(p+eps) − L(p−eps)) / 2eps` against `analytic`.
pub fn finite_difference_check<P, F>(params: &P, analytic: &P, eps: f64, loss: F) -> Vec<TensorCheck>
where
    P: ParamTensors + Clone,
    F: Fn(&P) -> f64,
{
    let mut probe = params.clone();
    let names: Vec<(String, usize)> = params.tensors().iter().map(|(n, t)| (n.clone(), t.len())).collect();
    let analytic_tensors = analytic.tensors();
    let mut checks = Vec::with_capacity(names.len());

    for (ti, (name, len)) in names.into_iter().enumerate() {
        let mut numeric = vec![0.0; len];
        for (k, slot) in numeric.iter_mut().enumerate() {
            let original = nudge(&mut probe, ti, k, None);
            nudge(&mut probe, ti, k, Some(original + eps));
            let plus = loss(&probe);
            nudge(&mut probe, ti, k, Some(original - eps));
            let minus = loss(&probe);
            nudge(&mut probe, ti, k, Some(original));
            *slot = (plus - minus) / (2.0 * eps);
        }
        let a = &analytic_tensors[ti].1;
        let a: Vec<f64> = a.iter().copied().collect();
        let diff_norm = a
            .iter()
            .zip(&numeric)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        let max_abs_diff = a.iter().zip(&numeric).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let analytic_norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let numeric_norm = numeric.iter().map(|x| x * x).sum::<f64>().sqrt();
        let denom = analytic_norm.max(numeric_norm);
        let relative_error = if denom == 0.0 { 0.0 } else { diff_norm / denom };
        checks.push(TensorCheck {
            name,
            len,
            relative_error,
            max_abs_diff,
            analytic_norm,
            numeric_norm,
        });
    }
    checks
}

/// Reads element `k` of tensor `ti`, optionally overwriting it.
fn nudge<P: ParamTensors>(p: &mut P, ti: usize, k: usize, set: Option<f64>) -> f64 {
    let mut tensors = p.tensors_mut();
    let slot = tensors[ti]
        .1
        .as_slice_mut()
        .expect("parameter tensors are contiguous")
        .get_mut(k)
        .expect("index within tensor");
    let old = *slot;
    if let Some(v) = set {
        *slot = v;
    }
    old
}
