//! Straight-line reference implementation of the toy GAN maths, written
//! per sample with nested vectors so it shares no code with the library.

#![allow(dead_code)]

use qgan_core::gan::{
    discriminator_loss_grads, flatten_grads, gan_losses, generator_loss, generator_loss_grads,
    Activation, Dense, Mlp,
};
use qgan_core::Tensor;
use rand::Rng;

pub struct Layer {
    /// `w[i][j]`: input `i` to output `j`.
    pub w: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub act: Activation,
}

pub struct Net {
    pub layers: Vec<Layer>,
}

fn act(a: Activation, z: f64) -> f64 {
    match a {
        Activation::LeakyRelu => if z > 0.0 { z } else { 0.2 * z },
        Activation::Relu => if z > 0.0 { z } else { 0.0 },
        Activation::Tanh => (z.exp() - (-z).exp()) / (z.exp() + (-z).exp()),
        Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
        Activation::Identity => z,
    }
}

fn dact(a: Activation, z: f64) -> f64 {
    match a {
        Activation::LeakyRelu => if z > 0.0 { 1.0 } else { 0.2 },
        Activation::Relu => if z > 0.0 { 1.0 } else { 0.0 },
        Activation::Tanh => 1.0 - act(a, z).powi(2),
        Activation::Sigmoid => act(a, z) * (1.0 - act(a, z)),
        Activation::Identity => 1.0,
    }
}

pub struct Trace {
    /// Input to each layer, then the output.
    pub xs: Vec<Vec<f64>>,
    pub zs: Vec<Vec<f64>>,
}

pub struct Grads {
    pub w: Vec<Vec<Vec<f64>>>,
    pub b: Vec<Vec<f64>>,
}

impl Net {
    pub fn of(mlp: &Mlp) -> Self {
        let layers = mlp
            .layers()
            .iter()
            .map(|l| {
                let (din, dout) = (l.weight.shape()[0], l.weight.shape()[1]);
                let d = l.weight.data();
                Layer {
                    w: (0..din).map(|i| (0..dout).map(|j| d[i * dout + j]).collect()).collect(),
                    b: l.bias.data().to_vec(),
                    act: l.activation,
                }
            })
            .collect();
        Net { layers }
    }

    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            for row in &l.w {
                out.extend(row);
            }
            out.extend(&l.b);
        }
        out
    }

    pub fn trace(&self, x: &[f64]) -> Trace {
        let mut xs = vec![x.to_vec()];
        let mut zs = Vec::new();
        for l in &self.layers {
            let input = xs.last().unwrap();
            let mut z = l.b.clone();
            for (i, xi) in input.iter().enumerate() {
                for (j, zj) in z.iter_mut().enumerate() {
                    *zj += xi * l.w[i][j];
                }
            }
            xs.push(z.iter().map(|&v| act(l.act, v)).collect());
            zs.push(z);
        }
        Trace { xs, zs }
    }

    pub fn run(&self, x: &[f64]) -> Vec<f64> {
        self.trace(x).xs.pop().unwrap()
    }

    pub fn zero_grads(&self) -> Grads {
        Grads {
            w: self.layers.iter().map(|l| vec![vec![0.0; l.b.len()]; l.w.len()]).collect(),
            b: self.layers.iter().map(|l| vec![0.0; l.b.len()]).collect(),
        }
    }

    /// Accumulates parameter gradients for one sample; returns d/d(input).
    pub fn backprop(&self, t: &Trace, dout: &[f64], acc: &mut Grads) -> Vec<f64> {
        let mut up = dout.to_vec();
        for k in (0..self.layers.len()).rev() {
            let l = &self.layers[k];
            let dz: Vec<f64> = up.iter().zip(&t.zs[k]).map(|(g, &z)| g * dact(l.act, z)).collect();
            let mut dx = vec![0.0; l.w.len()];
            for i in 0..l.w.len() {
                for j in 0..dz.len() {
                    acc.w[k][i][j] += t.xs[k][i] * dz[j];
                    dx[i] += l.w[i][j] * dz[j];
                }
            }
            for j in 0..dz.len() {
                acc.b[k][j] += dz[j];
            }
            up = dx;
        }
        up
    }

    /// Adam's first step from zero moments, where `m_hat = g` and `v_hat = g^2`.
    pub fn adam_first_step(&mut self, g: &Grads, lr: f64) {
        let upd = |p: &mut f64, g: f64| *p -= lr * g / ((g * g).sqrt() + 1e-8);
        for (k, l) in self.layers.iter_mut().enumerate() {
            for i in 0..l.w.len() {
                for j in 0..l.b.len() {
                    upd(&mut l.w[i][j], g.w[k][i][j]);
                }
            }
            for j in 0..l.b.len() {
                upd(&mut l.b[j], g.b[k][j]);
            }
        }
    }
}

pub fn rows(t: &Tensor) -> Vec<Vec<f64>> {
    let c = t.shape()[1];
    t.data().chunks(c).map(|r| r.to_vec()).collect()
}

fn clamp(p: f64) -> f64 {
    p.clamp(1e-7, 1.0 - 1e-7)
}

pub struct StepOutcome {
    pub d_loss: f64,
    pub g_loss: f64,
    pub g_params: Vec<f64>,
    pub d_params: Vec<f64>,
}

/// First training step from fresh Adam state, full precision.
pub fn first_step(g: &Mlp, d: &Mlp, real: &Tensor, d_noise: &Tensor, g_noise: &Tensor, lr: f64) -> StepOutcome {
    let mut gn = Net::of(g);
    let mut dn = Net::of(d);
    let real = rows(real);
    let n = real.len() as f64;
    let fake: Vec<Vec<f64>> = rows(d_noise).iter().map(|z| gn.run(z)).collect();

    let mut d_loss = 0.0;
    let mut dg = dn.zero_grads();
    for x in &real {
        let t = dn.trace(x);
        let p = t.xs.last().unwrap()[0];
        d_loss -= clamp(p).ln() / n;
        dn.backprop(&t, &[-1.0 / (n * p)], &mut dg);
    }
    for x in &fake {
        let t = dn.trace(x);
        let p = t.xs.last().unwrap()[0];
        d_loss -= (1.0 - clamp(p)).ln() / n;
        dn.backprop(&t, &[1.0 / (n * (1.0 - p))], &mut dg);
    }
    dn.adam_first_step(&dg, lr);

    let mut g_loss = 0.0;
    let mut gg = gn.zero_grads();
    let mut sink = dn.zero_grads();
    for z in rows(g_noise) {
        let tg = gn.trace(&z);
        let td = dn.trace(tg.xs.last().unwrap());
        let p = td.xs.last().unwrap()[0];
        g_loss -= clamp(p).ln() / n;
        let dx = dn.backprop(&td, &[-1.0 / (n * p)], &mut sink);
        gn.backprop(&tg, &dx, &mut gg);
    }
    gn.adam_first_step(&gg, lr);

    StepOutcome { d_loss, g_loss, g_params: gn.flat(), d_params: dn.flat() }
}

fn random_tensor<R: Rng>(rng: &mut R, name: &str, shape: Vec<usize>, scale: f64) -> Tensor {
    let n = shape.iter().product();
    let data = (0..n).map(|_| rng.random_range(-scale..scale)).collect();
    Tensor::new(name, shape, data).unwrap()
}

/// Random MLP with 1 to 3 layers of at most 16 units.
pub fn random_mlp<R: Rng>(rng: &mut R, input: usize, output: usize, out_act: Activation) -> Mlp {
    let depth = rng.random_range(1..=3);
    let mut dims = vec![input];
    for _ in 1..depth {
        dims.push(rng.random_range(1..=16));
    }
    dims.push(output);
    let hidden = [Activation::LeakyRelu, Activation::Relu, Activation::Tanh, Activation::Sigmoid];
    let layers = dims
        .windows(2)
        .enumerate()
        .map(|(i, w)| Dense {
            weight: random_tensor(rng, "w", vec![w[0], w[1]], 1.0),
            bias: random_tensor(rng, "b", vec![w[1]], 0.5),
            activation: if i + 2 == dims.len() { out_act } else { hidden[rng.random_range(0..hidden.len())] },
        })
        .collect();
    Mlp::new(layers).unwrap()
}

pub fn random_batch<R: Rng>(rng: &mut R, n: usize, dim: usize) -> Tensor {
    random_tensor(rng, "x", vec![n, dim], 2.0)
}

fn kink_pattern(net: &Net, xs: &[Vec<f64>]) -> Vec<bool> {
    xs.iter()
        .flat_map(|x| {
            let t = net.trace(x);
            net.layers
                .iter()
                .zip(t.zs)
                .filter(|(l, _)| matches!(l.act, Activation::LeakyRelu | Activation::Relu))
                .flat_map(|(_, z)| z.into_iter().map(|v| v > 0.0))
                .collect::<Vec<_>>()
        })
        .collect()
}

fn close(a: f64, b: f64) -> bool {
    let diff = (a - b).abs();
    diff <= 1e-8 || diff <= 1e-5 * a.abs().max(b.abs())
}

pub const FD_STEP: f64 = 1e-5;

/// Mismatched coordinates `(index, analytic, numeric)` of the discriminator
/// loss gradient. Coordinates whose perturbation crosses a ReLU kink are
/// skipped (the derivative does not exist there).
pub fn check_discriminator(d: &Mlp, real: &Tensor, fake: &Tensor) -> (usize, Vec<(usize, f64, f64)>) {
    let (_, grads) = discriminator_loss_grads(d, real, fake).unwrap();
    let analytic = flatten_grads(&grads);
    let loss = |m: &Mlp| {
        let pr = m.forward(real).unwrap();
        let pf = m.forward(fake).unwrap();
        gan_losses(pr.data(), pf.data()).unwrap().d_loss
    };
    let inputs: Vec<Vec<f64>> = rows(real).into_iter().chain(rows(fake)).collect();
    fd_compare(d, &analytic, loss, |m| kink_pattern(&Net::of(m), &inputs))
}

/// As [`check_discriminator`] for the generator loss w.r.t. G's parameters.
pub fn check_generator(g: &Mlp, d: &Mlp, noise: &Tensor) -> (usize, Vec<(usize, f64, f64)>) {
    let (_, grads) = generator_loss_grads(g, d, noise).unwrap();
    let analytic = flatten_grads(&grads);
    let loss = |m: &Mlp| generator_loss(d.forward(&m.forward(noise).unwrap()).unwrap().data());
    let zs = rows(noise);
    let dn = Net::of(d);
    fd_compare(g, &analytic, loss, |m| {
        let gn = Net::of(m);
        let outs: Vec<Vec<f64>> = zs.iter().map(|z| gn.run(z)).collect();
        let mut p = kink_pattern(&gn, &zs);
        p.extend(kink_pattern(&dn, &outs));
        p
    })
}

fn fd_compare(
    net: &Mlp,
    analytic: &[f64],
    loss: impl Fn(&Mlp) -> f64,
    pattern: impl Fn(&Mlp) -> Vec<bool>,
) -> (usize, Vec<(usize, f64, f64)>) {
    let base = net.flat_params();
    assert_eq!(base.len(), analytic.len());
    let mut probe = net.clone();
    let mut checked = 0;
    let mut bad = Vec::new();
    for i in 0..base.len() {
        let mut p = base.clone();
        p[i] = base[i] + FD_STEP;
        probe.set_flat_params(&p).unwrap();
        let (up, pat_up) = (loss(&probe), pattern(&probe));
        p[i] = base[i] - FD_STEP;
        probe.set_flat_params(&p).unwrap();
        let (down, pat_down) = (loss(&probe), pattern(&probe));
        if pat_up != pat_down {
            continue;
        }
        checked += 1;
        let numeric = (up - down) / (2.0 * FD_STEP);
        if !close(analytic[i], numeric) {
            bad.push((i, analytic[i], numeric));
        }
    }
    (checked, bad)
}
