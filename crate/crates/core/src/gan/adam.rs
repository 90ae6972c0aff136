use super::mlp::{LayerGrads, Mlp};

/// Adam with bias correction, one moment pair per parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: i32,
    m: Vec<LayerGrads>,
    v: Vec<LayerGrads>,
}

impl Adam {
    pub fn new(mlp: &Mlp, lr: f64, beta1: f64, beta2: f64) -> Self {
        let zeros: Vec<LayerGrads> = mlp
            .layers()
            .iter()
            .map(|l| LayerGrads {
                weight: vec![0.0; l.weight.len()],
                bias: vec![0.0; l.bias.len()],
            })
            .collect();
        Self {
            lr,
            beta1,
            beta2,
            eps: 1e-8,
            t: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn steps(&self) -> i32 {
        self.t
    }

    pub fn step(&mut self, mlp: &mut Mlp, grads: &[LayerGrads]) {
        self.t += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.t);
        let c2 = 1.0 - b2.powi(self.t);
        let (lr, eps) = (self.lr, self.eps);
        let (m, v) = (&mut self.m, &mut self.v);
        mlp.apply_update(|l, weight, bias| {
            let upd = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
                for (((p, &g), m), v) in p.iter_mut().zip(g).zip(m).zip(v) {
                    *m = b1 * *m + (1.0 - b1) * g;
                    *v = b2 * *v + (1.0 - b2) * g * g;
                    *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
                }
            };
            upd(weight, &grads[l].weight, &mut m[l].weight, &mut v[l].weight);
            upd(bias, &grads[l].bias, &mut m[l].bias, &mut v[l].bias);
        });
    }
}
