//! Quantization-aware GAN training.
//!
//! Master weights stay in full precision. When a network has a bit-width
//! configured, each forward pass sees a per-layer quantized copy of its
//! weight matrices (biases untouched), refitted from the masters at every
//! use. Gradients computed against the quantized copy are applied to the
//! masters unchanged (straight-through estimator).

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::dataset::RingDataset;
use super::loss::{fake_term_grad, gan_losses, generator_loss, real_term_grad, GanLosses};
use super::mlp::{Activation, LayerGrads, Mlp};
use super::quality::{quality_of_samples, QualityScore};
use super::GanError;
use crate::quant::{check_bits, fit_and_quantize, QuantOptions, Scheme};
use crate::seed::{rng_for, Stream};
use crate::tensor::Tensor;

pub const DEFAULT_EVAL_EVERY: usize = 250;
pub const DEFAULT_EVAL_SAMPLES: usize = 5000;

/// Weight quantization applied to one network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantSpec {
    pub scheme: Scheme,
    pub bits: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GanConfig {
    pub noise_dim: usize,
    pub gen_layers: Vec<usize>,
    pub disc_layers: Vec<usize>,
    pub gen_hidden: Activation,
    pub disc_hidden: Activation,
    /// `None` keeps the discriminator in full precision.
    pub d_bits: Option<u32>,
    pub g_bits: Option<u32>,
    pub d_scheme: Scheme,
    pub g_scheme: Scheme,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub batch_size: usize,
    pub steps: usize,
    pub eval_every: usize,
    pub eval_samples: usize,
    pub seed: u64,
}

impl Default for GanConfig {
    fn default() -> Self {
        Self {
            noise_dim: 2,
            gen_layers: vec![2, 64, 64, 2],
            disc_layers: vec![2, 64, 64, 1],
            gen_hidden: Activation::Tanh,
            disc_hidden: Activation::LeakyRelu,
            d_bits: None,
            g_bits: None,
            d_scheme: Scheme::EmLinear,
            g_scheme: Scheme::EmLinear,
            learning_rate: 2e-4,
            adam_beta1: 0.5,
            adam_beta2: 0.999,
            batch_size: 128,
            steps: 4000,
            eval_every: DEFAULT_EVAL_EVERY,
            eval_samples: DEFAULT_EVAL_SAMPLES,
            seed: 42,
        }
    }
}

impl GanConfig {
    pub fn d_quant(&self) -> Option<QuantSpec> {
        self.d_bits.map(|bits| QuantSpec { scheme: self.d_scheme, bits })
    }

    pub fn g_quant(&self) -> Option<QuantSpec> {
        self.g_bits.map(|bits| QuantSpec { scheme: self.g_scheme, bits })
    }

    pub fn validate(&self) -> Result<(), GanError> {
        let bad = |msg: String| Err(GanError::InvalidConfig(msg));
        for bits in [self.d_bits, self.g_bits].into_iter().flatten() {
            if check_bits(bits).is_err() {
                return bad(format!("bit-width {bits} outside [1, 16]"));
            }
        }
        if self.gen_layers.len() < 2 || self.disc_layers.len() < 2 {
            return bad("each network needs at least one layer".into());
        }
        if self.gen_layers[0] != self.noise_dim {
            return bad(format!(
                "generator input {} != noise_dim {}",
                self.gen_layers[0], self.noise_dim
            ));
        }
        if self.gen_layers.last() != Some(&2) || self.disc_layers[0] != 2 {
            return bad("generator must emit 2-D points and the discriminator consume them".into());
        }
        if self.disc_layers.last() != Some(&1) {
            return bad("discriminator must output one probability".into());
        }
        if self.batch_size == 0 || self.eval_every == 0 || self.eval_samples == 0 {
            return bad("batch_size, eval_every and eval_samples must be positive".into());
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate {} invalid", self.learning_rate));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GanModel {
    pub generator: Mlp,
    pub discriminator: Mlp,
    pub d_quant: Option<QuantSpec>,
    pub g_quant: Option<QuantSpec>,
    g_opt: Adam,
    d_opt: Adam,
}

impl GanModel {
    /// Fresh model with weights drawn from the config's init stream.
    pub fn new(config: &GanConfig) -> Result<Self, GanError> {
        config.validate()?;
        let mut rng = rng_for(config.seed, Stream::Init);
        let generator = Mlp::init("g", &config.gen_layers, config.gen_hidden, Activation::Identity, &mut rng)?;
        let discriminator =
            Mlp::init("d", &config.disc_layers, config.disc_hidden, Activation::Sigmoid, &mut rng)?;
        Ok(Self::from_networks(generator, discriminator, config))
    }

    pub fn from_networks(generator: Mlp, discriminator: Mlp, config: &GanConfig) -> Self {
        let opt = |m: &Mlp| Adam::new(m, config.learning_rate, config.adam_beta1, config.adam_beta2);
        Self {
            g_opt: opt(&generator),
            d_opt: opt(&discriminator),
            generator,
            discriminator,
            d_quant: config.d_quant(),
            g_quant: config.g_quant(),
        }
    }

    /// All master tensors, generator first (`g.0.w`, `g.0.b`, ..., `d.0.w`, ...).
    pub fn tensors(&self) -> Vec<Tensor> {
        let mut t = self.generator.tensors();
        t.extend(self.discriminator.tensors());
        t
    }

    /// Weight matrices as the forward pass sees them.
    pub fn effective_weights(&self, which: Network) -> Result<Vec<Vec<f64>>, GanError> {
        match which {
            Network::Generator => quantized_weights(&self.generator, self.g_quant),
            Network::Discriminator => quantized_weights(&self.discriminator, self.d_quant),
        }
    }

    /// Generator output for an `[n, noise_dim]` noise batch, with the
    /// deployed (possibly quantized) weights.
    pub fn generate(&self, noise: &Tensor) -> Result<Tensor, GanError> {
        let n = self.generator.check_batch(noise)?;
        let w = self.effective_weights(Network::Generator)?;
        let out = self.generator.forward_with(&w, noise.data(), n).output().to_vec();
        Ok(Tensor::new("fake", vec![n, self.generator.output_dim()], out)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Network {
    Generator,
    Discriminator,
}

pub fn quantized_weights(mlp: &Mlp, spec: Option<QuantSpec>) -> Result<Vec<Vec<f64>>, GanError> {
    let Some(spec) = spec else {
        return Ok(mlp.master_weights());
    };
    let options = QuantOptions::default();
    mlp.layers()
        .iter()
        .map(|l| {
            let fitted = fit_and_quantize(&l.weight, spec.scheme, spec.bits, &options)?;
            Ok(fitted.outcome.quantized.into_data())
        })
        .collect()
}

/// `[n, dim]` standard normal noise.
pub fn sample_noise<R: Rng>(n: usize, dim: usize, rng: &mut R) -> Tensor {
    let data = (0..n * dim).map(|_| StandardNormal.sample(rng)).collect();
    Tensor::new("noise", vec![n, dim], data).expect("finite noise")
}

/// Discriminator loss and its gradient w.r.t. the discriminator weights,
/// using the given effective weight matrices.
fn d_loss_grads(
    d: &Mlp,
    d_weights: &[Vec<f64>],
    real: &[f64],
    fake: &[f64],
    n: usize,
) -> (f64, f64, Vec<LayerGrads>) {
    let real_cache = d.forward_with(d_weights, real, n);
    let fake_cache = d.forward_with(d_weights, fake, n);
    let losses = gan_losses(real_cache.output(), fake_cache.output()).expect("equal batches");
    let (g_real, _) = d.backward(d_weights, &real_cache, &real_term_grad(real_cache.output()));
    let (g_fake, _) = d.backward(d_weights, &fake_cache, &fake_term_grad(fake_cache.output()));
    let grads = g_real
        .into_iter()
        .zip(g_fake)
        .map(|(a, b)| LayerGrads {
            weight: a.weight.iter().zip(&b.weight).map(|(x, y)| x + y).collect(),
            bias: a.bias.iter().zip(&b.bias).map(|(x, y)| x + y).collect(),
        })
        .collect();
    (losses.d_loss, losses.g_loss, grads)
}

/// Generator loss and its gradient w.r.t. the generator weights.
fn g_loss_grads(
    g: &Mlp,
    g_weights: &[Vec<f64>],
    d: &Mlp,
    d_weights: &[Vec<f64>],
    noise: &[f64],
    n: usize,
) -> (f64, Vec<LayerGrads>) {
    let g_cache = g.forward_with(g_weights, noise, n);
    let d_cache = d.forward_with(d_weights, g_cache.output(), n);
    let loss = generator_loss(d_cache.output());
    let (_, grad_fake) = d.backward(d_weights, &d_cache, &real_term_grad(d_cache.output()));
    let (grads, _) = g.backward(g_weights, &g_cache, &grad_fake);
    (loss, grads)
}

/// Full-precision discriminator loss and parameter gradients for fixed
/// real and fake batches (both `[n, 2]`).
pub fn discriminator_loss_grads(
    d: &Mlp,
    real: &Tensor,
    fake: &Tensor,
) -> Result<(f64, Vec<LayerGrads>), GanError> {
    let n = d.check_batch(real)?;
    if d.check_batch(fake)? != n {
        return Err(GanError::ShapeMismatch("real and fake batch sizes differ".into()));
    }
    let (loss, _, grads) = d_loss_grads(d, &d.master_weights(), real.data(), fake.data(), n);
    Ok((loss, grads))
}

/// Full-precision non-saturating generator loss and gradients w.r.t. the
/// generator parameters, for a fixed noise batch.
pub fn generator_loss_grads(
    g: &Mlp,
    d: &Mlp,
    noise: &Tensor,
) -> Result<(f64, Vec<LayerGrads>), GanError> {
    let n = g.check_batch(noise)?;
    if g.output_dim() != d.input_dim() {
        return Err(GanError::ShapeMismatch("generator output != discriminator input".into()));
    }
    Ok(g_loss_grads(g, &g.master_weights(), d, &d.master_weights(), noise.data(), n))
}

/// One discriminator update on (`real`, `G(d_noise)`), then one generator
/// update on `g_noise`. Returns the discriminator loss before its update and
/// the generator loss before its update (after the discriminator's).
pub fn train_step_on(
    model: &mut GanModel,
    real: &Tensor,
    d_noise: &Tensor,
    g_noise: &Tensor,
) -> Result<GanLosses, GanError> {
    let n = model.discriminator.check_batch(real)?;
    if model.generator.check_batch(d_noise)? != n || model.generator.check_batch(g_noise)? != n {
        return Err(GanError::ShapeMismatch("batches must share one size".into()));
    }

    let g_w = model.effective_weights(Network::Generator)?;
    let d_w = model.effective_weights(Network::Discriminator)?;
    let fake = model.generator.forward_with(&g_w, d_noise.data(), n);
    let (d_loss, _, d_grads) = d_loss_grads(&model.discriminator, &d_w, real.data(), fake.output(), n);
    model.d_opt.step(&mut model.discriminator, &d_grads);

    let d_w = model.effective_weights(Network::Discriminator)?;
    let (g_loss, g_grads) = g_loss_grads(&model.generator, &g_w, &model.discriminator, &d_w, g_noise.data(), n);
    model.g_opt.step(&mut model.generator, &g_grads);

    if !d_loss.is_finite() || !g_loss.is_finite() {
        return Err(GanError::NonFinite);
    }
    Ok(GanLosses { d_loss, g_loss })
}

/// Random streams used by [`train_step`].
pub struct TrainRngs<R> {
    pub data: R,
    pub noise: R,
}

/// Draws `real` from `data`, then `d_noise` and `g_noise` (in that order)
/// from `noise`, and calls [`train_step_on`].
pub fn train_step<R: Rng>(
    model: &mut GanModel,
    config: &GanConfig,
    dataset: &RingDataset,
    rngs: &mut TrainRngs<R>,
) -> Result<GanLosses, GanError> {
    let n = config.batch_size;
    let real = dataset.sample(n, &mut rngs.data);
    let d_noise = sample_noise(n, config.noise_dim, &mut rngs.noise);
    let g_noise = sample_noise(n, config.noise_dim, &mut rngs.noise);
    train_step_on(model, &real, &d_noise, &g_noise)
}

/// Quality of `n_samples` generator outputs, using noise from the `Eval`
/// stream of `seed`.
pub fn evaluate_quality(
    model: &GanModel,
    dataset: &RingDataset,
    n_samples: usize,
    seed: u64,
) -> Result<QualityScore, GanError> {
    let mut rng = rng_for(seed, Stream::Eval);
    let noise = sample_noise(n_samples, model.generator.input_dim(), &mut rng);
    let samples = model.generate(&noise)?;
    Ok(quality_of_samples(samples.data(), dataset))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub step: usize,
    pub d_loss: f64,
    pub g_loss: f64,
    pub quality: QualityScore,
}

pub const HISTORY_HEADER: &str = "step,d_loss,g_loss,score";

pub fn write_history_csv<W: std::io::Write>(mut out: W, history: &[HistoryEntry]) -> std::io::Result<()> {
    writeln!(out, "{HISTORY_HEADER}")?;
    for h in history {
        writeln!(out, "{},{},{},{}", h.step, h.d_loss, h.g_loss, h.quality.score)?;
    }
    Ok(())
}

/// Train for `config.steps` steps. The history holds one entry every
/// `config.eval_every` steps plus one for the final step. Real batches use
/// the dataset seed's `Data` stream; init, noise and evaluation use the
/// config seed's `Init`, `Train` and `Eval` streams.
pub fn train(config: &GanConfig, dataset: &RingDataset) -> Result<(GanModel, Vec<HistoryEntry>), GanError> {
    train_with(config, dataset, |_| {})
}

/// [`train`] with a callback invoked after each history entry.
pub fn train_with(
    config: &GanConfig,
    dataset: &RingDataset,
    mut on_entry: impl FnMut(&HistoryEntry),
) -> Result<(GanModel, Vec<HistoryEntry>), GanError> {
    let mut model = GanModel::new(config)?;
    let mut rngs = TrainRngs {
        data: rng_for(dataset.seed, Stream::Data),
        noise: rng_for(config.seed, Stream::Train),
    };
    let mut history = Vec::new();
    for step in 1..=config.steps {
        let losses = train_step(&mut model, config, dataset, &mut rngs)?;
        if step % config.eval_every == 0 || step == config.steps {
            let quality = evaluate_quality(&model, dataset, config.eval_samples, config.seed)?;
            let entry = HistoryEntry {
                step,
                d_loss: losses.d_loss,
                g_loss: losses.g_loss,
                quality,
            };
            on_entry(&entry);
            history.push(entry);
        }
    }
    Ok((model, history))
}
