use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, ArrayViewD, ArrayViewMutD, Axis};
use rand::Rng;

use super::{prefixed, sigmoid, uniform_matrix, NnError, ParamTensors};

/// Single-direction LSTM weights. Gate rows are stacked as
/// `[input; forget; candidate; output]`, each `hidden` rows tall.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    /// `4h × d_in`
    pub w: Array2<f64>,
    /// `4h × h`
    pub u: Array2<f64>,
    /// `4h`
    pub b: Array1<f64>,
}

impl LstmParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            w: Array2::zeros((4 * hidden, input)),
            u: Array2::zeros((4 * hidden, hidden)),
            b: Array1::zeros(4 * hidden),
        }
    }

    /// Uniform `±1/sqrt(h)` weights, zero bias except a forget bias of 1.
    pub fn init<R: Rng>(input: usize, hidden: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (hidden as f64).sqrt();
        let mut b = Array1::zeros(4 * hidden);
        b.slice_mut(s![hidden..2 * hidden]).fill(1.0);
        Self {
            w: uniform_matrix(rng, 4 * hidden, input, bound),
            u: uniform_matrix(rng, 4 * hidden, hidden, bound),
            b,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w.ncols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.u.ncols()
    }
}

impl ParamTensors for LstmParams {
    fn tensors(&self) -> Vec<(String, ArrayViewD<'_, f64>)> {
        vec![
            ("w".into(), self.w.view().into_dyn()),
            ("u".into(), self.u.view().into_dyn()),
            ("b".into(), self.b.view().into_dyn()),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<(String, ArrayViewMutD<'_, f64>)> {
        vec![
            ("w".into(), self.w.view_mut().into_dyn()),
            ("u".into(), self.u.view_mut().into_dyn()),
            ("b".into(), self.b.view_mut().into_dyn()),
        ]
    }
}

#[derive(Debug, Clone)]
struct Step {
    x: Array1<f64>,
    h_prev: Array1<f64>,
    c_prev: Array1<f64>,
    i: Array1<f64>,
    f: Array1<f64>,
    g: Array1<f64>,
    o: Array1<f64>,
    tanh_c: Array1<f64>,
    c: Array1<f64>,
    h: Array1<f64>,
}

fn step(x: ArrayView1<'_, f64>, h_prev: ArrayView1<'_, f64>, c_prev: ArrayView1<'_, f64>, p: &LstmParams) -> Step {
    let h = p.hidden_dim();
    let z = p.w.dot(&x) + p.u.dot(&h_prev) + &p.b;
    let i = z.slice(s![0..h]).mapv(sigmoid);
    let f = z.slice(s![h..2 * h]).mapv(sigmoid);
    let g = z.slice(s![2 * h..3 * h]).mapv(f64::tanh);
    let o = z.slice(s![3 * h..4 * h]).mapv(sigmoid);
    let c = &f * &c_prev + &i * &g;
    let tanh_c = c.mapv(f64::tanh);
    let h_t = &o * &tanh_c;
    Step {
        x: x.to_owned(),
        h_prev: h_prev.to_owned(),
        c_prev: c_prev.to_owned(),
        i,
        f,
        g,
        o,
        tanh_c,
        c,
        h: h_t,
    }
}

fn check(what: &'static str, expected: usize, got: usize) -> Result<(), NnError> {
    if expected == got {
        Ok(())
    } else {
        Err(NnError::Dimension { what, expected, got })
    }
}

/// One LSTM time step: sigmoid input/forget/output gates, tanh candidate,
/// `c = f∘c_prev + i∘g`, `h = o∘tanh(c)`.
pub fn lstm_cell_forward(
    x: ArrayView1<'_, f64>,
    h_prev: ArrayView1<'_, f64>,
    c_prev: ArrayView1<'_, f64>,
    p: &LstmParams,
) -> Result<(Array1<f64>, Array1<f64>), NnError> {
    check("lstm input", p.input_dim(), x.len())?;
    check("lstm hidden state", p.hidden_dim(), h_prev.len())?;
    check("lstm cell state", p.hidden_dim(), c_prev.len())?;
    let s = step(x, h_prev, c_prev, p);
    Ok((s.h, s.c))
}

/// Intermediate values of a unidirectional pass, in processing order.
#[derive(Debug, Clone)]
pub struct LstmTrace {
    steps: Vec<Step>,
}

/// Runs the LSTM over the rows of `xs` from zero initial state and returns
/// the hidden state at every step.
pub fn lstm_forward(xs: ArrayView2<'_, f64>, p: &LstmParams) -> (Array2<f64>, LstmTrace) {
    let h = p.hidden_dim();
    let mut out = Array2::zeros((xs.nrows(), h));
    let mut steps = Vec::with_capacity(xs.nrows());
    let mut h_prev = Array1::zeros(h);
    let mut c_prev = Array1::zeros(h);
    for (t, x) in xs.rows().into_iter().enumerate() {
        let s = step(x, h_prev.view(), c_prev.view(), p);
        out.row_mut(t).assign(&s.h);
        h_prev = s.h.clone();
        c_prev = s.c.clone();
        steps.push(s);
    }
    (out, LstmTrace { steps })
}

/// Backpropagation through time. `d_hs[t]` is the loss gradient with
/// respect to the hidden state emitted at step `t`. Returns `d xs`.
pub fn lstm_backward(
    trace: &LstmTrace,
    d_hs: ArrayView2<'_, f64>,
    p: &LstmParams,
    grads: &mut LstmParams,
) -> Array2<f64> {
    let h = p.hidden_dim();
    let mut dx = Array2::zeros((trace.steps.len(), p.input_dim()));
    let mut dh_next: Array1<f64> = Array1::zeros(h);
    let mut dc_next: Array1<f64> = Array1::zeros(h);
    for (t, s) in trace.steps.iter().enumerate().rev() {
        let dh = &d_hs.row(t) + &dh_next;
        let d_o = &dh * &s.tanh_c;
        let dc = &dh * &s.o * &s.tanh_c.mapv(|v| 1.0 - v * v) + &dc_next;
        let d_f = &dc * &s.c_prev;
        let d_i = &dc * &s.g;
        let d_g = &dc * &s.i;

        let mut dz = Array1::zeros(4 * h);
        dz.slice_mut(s![0..h]).assign(&(&d_i * &s.i * &s.i.mapv(|v| 1.0 - v)));
        dz.slice_mut(s![h..2 * h])
            .assign(&(&d_f * &s.f * &s.f.mapv(|v| 1.0 - v)));
        dz.slice_mut(s![2 * h..3 * h])
            .assign(&(&d_g * &s.g.mapv(|v| 1.0 - v * v)));
        dz.slice_mut(s![3 * h..4 * h])
            .assign(&(&d_o * &s.o * &s.o.mapv(|v| 1.0 - v)));

        let dz_col = dz.view().insert_axis(Axis(1));
        grads.w += &dz_col.dot(&s.x.view().insert_axis(Axis(0)));
        grads.u += &dz_col.dot(&s.h_prev.view().insert_axis(Axis(0)));
        grads.b += &dz;

        dx.row_mut(t).assign(&p.w.t().dot(&dz));
        dh_next = p.u.t().dot(&dz);
        dc_next = &dc * &s.f;
    }
    dx
}

/// Forward and backward LSTMs over the same sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct BiLstmParams {
    pub fwd: LstmParams,
    pub bwd: LstmParams,
}

impl BiLstmParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            fwd: LstmParams::zeros(input, hidden),
            bwd: LstmParams::zeros(input, hidden),
        }
    }

    pub fn init<R: Rng>(input: usize, hidden: usize, rng: &mut R) -> Self {
        Self {
            fwd: LstmParams::init(input, hidden, rng),
            bwd: LstmParams::init(input, hidden, rng),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.fwd.input_dim()
    }

    pub fn hidden_dim(&self) -> usize {
        self.fwd.hidden_dim()
    }

    /// Width of each output row, `2h`.
    pub fn output_dim(&self) -> usize {
        2 * self.hidden_dim()
    }
}

impl ParamTensors for BiLstmParams {
    fn tensors(&self) -> Vec<(String, ArrayViewD<'_, f64>)> {
        prefixed("fwd", self.fwd.tensors())
            .chain(prefixed("bwd", self.bwd.tensors()))
            .collect()
    }

    fn tensors_mut(&mut self) -> Vec<(String, ArrayViewMutD<'_, f64>)> {
        let Self { fwd, bwd } = self;
        prefixed("fwd", fwd.tensors_mut())
            .chain(prefixed("bwd", bwd.tensors_mut()))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct BiLstmTrace {
    fwd: LstmTrace,
    bwd: LstmTrace,
}

fn reversed(xs: ArrayView2<'_, f64>) -> Array2<f64> {
    xs.slice(s![..;-1, ..]).to_owned()
}

/// Row `t` of the output is `[forward h_t ; backward h_t]`.
pub fn bilstm_forward(xs: ArrayView2<'_, f64>, p: &BiLstmParams) -> (Array2<f64>, BiLstmTrace) {
    let h = p.hidden_dim();
    let (hf, fwd) = lstm_forward(xs, &p.fwd);
    let rev = reversed(xs);
    let (hb_rev, bwd) = lstm_forward(rev.view(), &p.bwd);
    let mut out = Array2::zeros((xs.nrows(), 2 * h));
    out.slice_mut(s![.., 0..h]).assign(&hf);
    out.slice_mut(s![.., h..2 * h]).assign(&hb_rev.slice(s![..;-1, ..]));
    (out, BiLstmTrace { fwd, bwd })
}

/// Checked entry point: rejects empty sequences and wrong input width.
pub fn bilstm_encode(xs: ArrayView2<'_, f64>, p: &BiLstmParams) -> Result<Array2<f64>, NnError> {
    if xs.nrows() == 0 {
        return Err(NnError::EmptySequence("bilstm input"));
    }
    check("bilstm input", p.input_dim(), xs.ncols())?;
    Ok(bilstm_forward(xs, p).0)
}

pub fn bilstm_backward(
    trace: &BiLstmTrace,
    d_out: ArrayView2<'_, f64>,
    p: &BiLstmParams,
    grads: &mut BiLstmParams,
) -> Array2<f64> {
    let h = p.hidden_dim();
    let dx_f = lstm_backward(&trace.fwd, d_out.slice(s![.., 0..h]), &p.fwd, &mut grads.fwd);
    let d_b_rev = reversed(d_out.slice(s![.., h..2 * h]));
    let dx_b_rev = lstm_backward(&trace.bwd, d_b_rev.view(), &p.bwd, &mut grads.bwd);
    dx_f + dx_b_rev.slice(s![..;-1, ..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{arr1, arr2};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_params_give_zero_state() {
        let p = LstmParams::zeros(3, 4);
        let (h, c) = lstm_cell_forward(
            arr1(&[0.0, 0.0, 0.0]).view(),
            Array1::zeros(4).view(),
            Array1::zeros(4).view(),
            &p,
        )
        .unwrap();
        assert!(h.iter().all(|v| *v == 0.0));
        assert!(c.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn saturated_forget_keeps_cell() {
        let mut p = LstmParams::zeros(2, 2);
        p.b.slice_mut(s![0..2]).fill(-50.0); // input gate shut
        p.b.slice_mut(s![2..4]).fill(50.0); // forget gate open
        let c_prev = arr1(&[0.7, -0.3]);
        let (_, c) = lstm_cell_forward(arr1(&[1.0, -2.0]).view(), arr1(&[0.1, 0.2]).view(), c_prev.view(), &p).unwrap();
        for (a, b) in c.iter().zip(c_prev.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_errors() {
        let p = LstmParams::zeros(3, 2);
        let err = lstm_cell_forward(
            arr1(&[1.0]).view(),
            Array1::zeros(2).view(),
            Array1::zeros(2).view(),
            &p,
        );
        assert_eq!(
            err,
            Err(NnError::Dimension {
                what: "lstm input",
                expected: 3,
                got: 1
            })
        );
        let bp = BiLstmParams::zeros(3, 2);
        assert_eq!(
            bilstm_encode(Array2::zeros((0, 3)).view(), &bp),
            Err(NnError::EmptySequence("bilstm input"))
        );
    }

    #[test]
    fn single_step_bilstm() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = BiLstmParams::init(2, 3, &mut rng);
        let x = arr2(&[[0.4, -0.1]]);
        let out = bilstm_encode(x.view(), &p).unwrap();
        let zero = Array1::zeros(3);
        let (hf, _) = lstm_cell_forward(x.row(0), zero.view(), zero.view(), &p.fwd).unwrap();
        let (hb, _) = lstm_cell_forward(x.row(0), zero.view(), zero.view(), &p.bwd).unwrap();
        assert_eq!(out.slice(s![0, 0..3]), hf);
        assert_eq!(out.slice(s![0, 3..6]), hb);
    }

    #[test]
    fn mirrored_parameters_mirror_outputs() {
        // Same weights in both directions over a palindromic input: row r
        // equals row T-1-r with the halves swapped.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let one = LstmParams::init(2, 3, &mut rng);
        let p = BiLstmParams {
            fwd: one.clone(),
            bwd: one,
        };
        let x = arr2(&[[0.5, -1.0], [0.2, 0.3], [0.5, -1.0]]);
        let out = bilstm_encode(x.view(), &p).unwrap();
        for r in 0..3 {
            let mirror = 2 - r;
            assert_eq!(out.slice(s![r, 0..3]), out.slice(s![mirror, 3..6]));
            assert_eq!(out.slice(s![r, 3..6]), out.slice(s![mirror, 0..3]));
        }
    }

    #[test]
    fn full_scale_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = BiLstmParams::init(100, 200, &mut rng);
        let out = bilstm_encode(Array2::zeros((2, 100)).view(), &p).unwrap();
        assert_eq!(out.shape(), &[2, 400]);
    }
}
