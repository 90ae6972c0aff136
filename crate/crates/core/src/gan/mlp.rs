use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use super::GanError;
use crate::tensor::Tensor;

pub const LEAKY_SLOPE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    /// Slope [`LEAKY_SLOPE`] for negative inputs.
    LeakyRelu,
    Relu,
    Tanh,
    Sigmoid,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::LeakyRelu => {
                if z > 0.0 {
                    z
                } else {
                    LEAKY_SLOPE * z
                }
            }
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Identity => z,
        }
    }

    /// Derivative given pre-activation `z` and output `a`.
    #[inline]
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::LeakyRelu => {
                if z > 0.0 {
                    1.0
                } else {
                    LEAKY_SLOPE
                }
            }
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Identity => 1.0,
        }
    }
}

/// Fully connected layer; `weight` has shape `[in, out]`, `bias` `[out]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub weight: Tensor,
    pub bias: Tensor,
    pub activation: Activation,
}

impl Dense {
    pub fn input_dim(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn output_dim(&self) -> usize {
        self.weight.shape()[1]
    }
}

/// Gradients for one [`Dense`] layer, laid out like its tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads {
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Flatten in [`Mlp::flat_params`] order.
pub fn flatten_grads(grads: &[LayerGrads]) -> Vec<f64> {
    grads
        .iter()
        .flat_map(|g| g.weight.iter().chain(&g.bias).copied())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    layers: Vec<Dense>,
}

/// Activations kept for the backward pass.
pub(crate) struct ForwardCache {
    batch: usize,
    /// `inputs[l]` is the input to layer `l`; the last entry is the output.
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub(crate) fn output(&self) -> &[f64] {
        self.inputs.last().expect("at least the input")
    }
}

impl Mlp {
    pub fn new(layers: Vec<Dense>) -> Result<Self, GanError> {
        if layers.is_empty() {
            return Err(GanError::InvalidConfig("an MLP needs at least one layer".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.weight.shape().len() != 2 || l.bias.shape() != [l.output_dim()] {
                return Err(GanError::ShapeMismatch(format!(
                    "layer {i}: weight {:?} / bias {:?}",
                    l.weight.shape(),
                    l.bias.shape()
                )));
            }
            if i > 0 && layers[i - 1].output_dim() != l.input_dim() {
                return Err(GanError::ShapeMismatch(format!(
                    "layer {i} expects {} inputs but layer {} yields {}",
                    l.input_dim(),
                    i - 1,
                    layers[i - 1].output_dim()
                )));
            }
        }
        Ok(Self { layers })
    }

    /// Uniform `±1/sqrt(fan_in)` initialization for weights and biases.
    /// Tensors are named `{prefix}.{layer}.w` and `{prefix}.{layer}.b`.
    pub fn init<R: Rng>(
        prefix: &str,
        dims: &[usize],
        hidden: Activation,
        output: Activation,
        rng: &mut R,
    ) -> Result<Self, GanError> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(GanError::InvalidConfig(format!("bad layer dims {dims:?}")));
        }
        let last = dims.len() - 2;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = 1.0 / (fan_in as f64).sqrt();
                let u = Uniform::new_inclusive(-bound, bound).expect("finite bound");
                let weight: Vec<f64> = (0..fan_in * fan_out).map(|_| u.sample(rng)).collect();
                let bias: Vec<f64> = (0..fan_out).map(|_| u.sample(rng)).collect();
                Ok(Dense {
                    weight: Tensor::new(format!("{prefix}.{i}.w"), vec![fan_in, fan_out], weight)?,
                    bias: Tensor::new(format!("{prefix}.{i}.b"), vec![fan_out], bias)?,
                    activation: if i == last { output } else { hidden },
                })
            })
            .collect::<Result<Vec<_>, GanError>>()?;
        Self::new(layers)
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].output_dim()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    /// All parameters, layer by layer, weights then biases.
    pub fn flat_params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weight.data().iter().chain(l.bias.data()).copied())
            .collect()
    }

    /// Inverse of [`Mlp::flat_params`].
    pub fn set_flat_params(&mut self, params: &[f64]) -> Result<(), GanError> {
        if params.len() != self.parameter_count() {
            return Err(GanError::ShapeMismatch(format!(
                "expected {} parameters, got {}",
                self.parameter_count(),
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(GanError::NonFinite);
        }
        let mut rest = params;
        for l in &mut self.layers {
            let (w, tail) = rest.split_at(l.weight.len());
            l.weight.data_mut().copy_from_slice(w);
            let (b, tail) = tail.split_at(l.bias.len());
            l.bias.data_mut().copy_from_slice(b);
            rest = tail;
        }
        Ok(())
    }

    /// Every weight and bias tensor, in layer order.
    pub fn tensors(&self) -> Vec<Tensor> {
        self.layers
            .iter()
            .flat_map(|l| [l.weight.clone(), l.bias.clone()])
            .collect()
    }

    pub(crate) fn master_weights(&self) -> Vec<Vec<f64>> {
        self.layers.iter().map(|l| l.weight.data().to_vec()).collect()
    }

    pub(crate) fn apply_update(&mut self, mut update: impl FnMut(usize, &mut [f64], &mut [f64])) {
        for (i, l) in self.layers.iter_mut().enumerate() {
            let Dense { weight, bias, .. } = l;
            update(i, weight.data_mut(), bias.data_mut());
        }
    }

    /// Batch forward pass; `batch` has shape `[n, input_dim]`.
    pub fn forward(&self, batch: &Tensor) -> Result<Tensor, GanError> {
        let n = self.check_batch(batch)?;
        let weights = self.master_weights();
        let cache = self.forward_with(&weights, batch.data(), n);
        let out = cache.inputs.into_iter().last().expect("output");
        Ok(Tensor::new(
            format!("{}.out", batch.name()),
            vec![n, self.output_dim()],
            out,
        )?)
    }

    pub(crate) fn check_batch(&self, batch: &Tensor) -> Result<usize, GanError> {
        match batch.shape() {
            [n, d] if *d == self.input_dim() => Ok(*n),
            other => Err(GanError::ShapeMismatch(format!(
                "batch shape {other:?} does not match input dim {}",
                self.input_dim()
            ))),
        }
    }

    /// Forward pass with substitute weight matrices (e.g. quantized copies).
    pub(crate) fn forward_with(&self, weights: &[Vec<f64>], input: &[f64], n: usize) -> ForwardCache {
        let mut inputs = Vec::with_capacity(self.layers.len() + 1);
        let mut pre = Vec::with_capacity(self.layers.len());
        inputs.push(input.to_vec());
        for (layer, w) in self.layers.iter().zip(weights) {
            let (din, dout) = (layer.input_dim(), layer.output_dim());
            let x = inputs.last().expect("input");
            let bias = layer.bias.data();
            let mut z = vec![0.0; n * dout];
            for b in 0..n {
                let row = &mut z[b * dout..(b + 1) * dout];
                row.copy_from_slice(bias);
                for i in 0..din {
                    let xi = x[b * din + i];
                    let wrow = &w[i * dout..(i + 1) * dout];
                    for (r, &wij) in row.iter_mut().zip(wrow) {
                        *r += xi * wij;
                    }
                }
            }
            let a = z.iter().map(|&v| layer.activation.apply(v)).collect();
            pre.push(z);
            inputs.push(a);
        }
        ForwardCache { batch: n, inputs, pre }
    }

    /// Backpropagate `grad_out` (gradient w.r.t. the network output).
    /// Returns parameter gradients and the gradient w.r.t. the input.
    pub(crate) fn backward(
        &self,
        weights: &[Vec<f64>],
        cache: &ForwardCache,
        grad_out: &[f64],
    ) -> (Vec<LayerGrads>, Vec<f64>) {
        let n = cache.batch;
        let mut grads: Vec<LayerGrads> = Vec::with_capacity(self.layers.len());
        let mut upstream = grad_out.to_vec();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let (din, dout) = (layer.input_dim(), layer.output_dim());
            let x = &cache.inputs[l];
            let z = &cache.pre[l];
            let a = &cache.inputs[l + 1];
            let dz: Vec<f64> = upstream
                .iter()
                .zip(z.iter().zip(a))
                .map(|(&g, (&zv, &av))| g * layer.activation.derivative(zv, av))
                .collect();
            let mut dw = vec![0.0; din * dout];
            let mut db = vec![0.0; dout];
            let mut dx = vec![0.0; n * din];
            let w = &weights[l];
            for b in 0..n {
                let dzrow = &dz[b * dout..(b + 1) * dout];
                for (d, &g) in db.iter_mut().zip(dzrow) {
                    *d += g;
                }
                for i in 0..din {
                    let xi = x[b * din + i];
                    let wrow = &w[i * dout..(i + 1) * dout];
                    let dwrow = &mut dw[i * dout..(i + 1) * dout];
                    let mut acc = 0.0;
                    for ((dwij, &wij), &g) in dwrow.iter_mut().zip(wrow).zip(dzrow) {
                        *dwij += xi * g;
                        acc += g * wij;
                    }
                    dx[b * din + i] = acc;
                }
            }
            grads.push(LayerGrads { weight: dw, bias: db });
            upstream = dx;
        }
        grads.reverse();
        (grads, upstream)
    }
}
