use ndarray::ArrayD;
use serde::{Deserialize, Serialize};

use super::ParamTensors;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    #[default]
    Sgd,
    Adam,
}

/// Gradient-descent update rules over any [`ParamTensors`] set.
#[derive(Debug, Clone)]
pub enum Optimizer {
    Sgd {
        lr: f64,
    },
    Adam {
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
        t: i32,
        m: Vec<ArrayD<f64>>,
        v: Vec<ArrayD<f64>>,
    },
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64) -> Self {
        match kind {
            OptimizerKind::Sgd => Optimizer::Sgd { lr },
            OptimizerKind::Adam => Optimizer::Adam {
                lr,
                beta1: 0.9,
                beta2: 0.999,
                eps: 1e-8,
                t: 0,
                m: Vec::new(),
                v: Vec::new(),
            },
        }
    }

    pub fn step<P: ParamTensors>(&mut self, params: &mut P, grads: &P) {
        let grads = grads.tensors();
        let params = params.tensors_mut();
        debug_assert_eq!(grads.len(), params.len());
        match self {
            Optimizer::Sgd { lr } => {
                for ((_, mut p), (_, g)) in params.into_iter().zip(grads.iter()) {
                    p.scaled_add(-*lr, g);
                }
            }
            Optimizer::Adam {
                lr,
                beta1,
                beta2,
                eps,
                t,
                m,
                v,
            } => {
                if m.is_empty() {
                    *m = grads.iter().map(|(_, g)| ArrayD::zeros(g.raw_dim())).collect();
                    *v = m.clone();
                }
                *t += 1;
                let bc1 = 1.0 - beta1.powi(*t);
                let bc2 = 1.0 - beta2.powi(*t);
                for (i, ((_, mut p), (_, g))) in params.into_iter().zip(grads.iter()).enumerate() {
                    let (b1, b2) = (*beta1, *beta2);
                    ndarray::Zip::from(&mut p)
                        .and(g)
                        .and(&mut m[i])
                        .and(&mut v[i])
                        .for_each(|p, &g, m, v| {
                            *m = b1 * *m + (1.0 - b1) * g;
                            *v = b2 * *v + (1.0 - b2) * g * g;
                            let m_hat = *m / bc1;
                            let v_hat = *v / bc2;
                            *p -= *lr * m_hat / (v_hat.sqrt() + *eps);
                        });
                }
            }
        }
    }
}
