//! Desk-scale GAN on a 2-D Gaussian ring.

mod adam;
mod dataset;
mod loss;
mod mlp;
mod model;
mod quality;

use thiserror::Error;

use crate::quant::QuantError;
use crate::tensor::TensorError;

pub use adam::Adam;
pub use dataset::RingDataset;
pub use loss::{
    fake_term_grad, gan_losses, generator_loss, real_term_grad, GanLosses, PROB_CLAMP,
};
pub use mlp::{flatten_grads, Activation, Dense, LayerGrads, Mlp, LEAKY_SLOPE};
pub use model::{
    discriminator_loss_grads, evaluate_quality, generator_loss_grads, quantized_weights,
    sample_noise, train, train_step, train_step_on, train_with, write_history_csv, GanConfig,
    GanModel, HistoryEntry, Network, QuantSpec, TrainRngs, DEFAULT_EVAL_EVERY,
    DEFAULT_EVAL_SAMPLES, HISTORY_HEADER,
};
pub use quality::{quality_of_samples, QualityScore, COVERAGE_SHARE, HQ_RADIUS_SIGMAS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GanError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid GAN config: {0}")]
    InvalidConfig(String),
    #[error("training diverged (non-finite loss or parameter)")]
    NonFinite,
    #[error(transparent)]
    Quant(#[from] QuantError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}
