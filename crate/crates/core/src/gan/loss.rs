//! GAN losses on discriminator probabilities.
//!
//! `d_loss = -mean(ln D(x)) - mean(ln(1 - D(G(z))))` and the non-saturating
//! `g_loss = -mean(ln D(G(z)))`. Probabilities are clamped to
//! `[PROB_CLAMP, 1 - PROB_CLAMP]` before the log; the gradients here are the
//! exact derivatives of the clamped losses.

use serde::{Deserialize, Serialize};

use super::GanError;

pub const PROB_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GanLosses {
    pub d_loss: f64,
    pub g_loss: f64,
}

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

fn inside(p: f64) -> bool {
    p > PROB_CLAMP && p < 1.0 - PROB_CLAMP
}

pub fn gan_losses(d_real: &[f64], d_fake: &[f64]) -> Result<GanLosses, GanError> {
    if d_real.len() != d_fake.len() || d_real.is_empty() {
        return Err(GanError::ShapeMismatch(format!(
            "real batch {} vs fake batch {}",
            d_real.len(),
            d_fake.len()
        )));
    }
    Ok(GanLosses {
        d_loss: real_term(d_real) + fake_term(d_fake),
        g_loss: generator_loss(d_fake),
    })
}

pub(crate) fn real_term(d_real: &[f64]) -> f64 {
    -d_real.iter().map(|&p| clamp_prob(p).ln()).sum::<f64>() / d_real.len() as f64
}

pub(crate) fn fake_term(d_fake: &[f64]) -> f64 {
    -d_fake.iter().map(|&p| (1.0 - clamp_prob(p)).ln()).sum::<f64>() / d_fake.len() as f64
}

pub fn generator_loss(d_fake: &[f64]) -> f64 {
    real_term(d_fake)
}

/// `d(-mean ln p)/dp` per element.
pub fn real_term_grad(d_real: &[f64]) -> Vec<f64> {
    let n = d_real.len() as f64;
    d_real
        .iter()
        .map(|&p| if inside(p) { -1.0 / (n * p) } else { 0.0 })
        .collect()
}

/// `d(-mean ln(1 - p))/dp` per element.
pub fn fake_term_grad(d_fake: &[f64]) -> Vec<f64> {
    let n = d_fake.len() as f64;
    d_fake
        .iter()
        .map(|&p| if inside(p) { 1.0 / (n * (1.0 - p)) } else { 0.0 })
        .collect()
}
