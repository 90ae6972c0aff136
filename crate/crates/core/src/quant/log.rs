//! Logarithmic minmax quantization.
//!
//! Magnitudes are quantized as `m = ln(|w| + eps)` with an affine code map
//! fitted by minmax over `{m}`; the sign is stored separately and reattached
//! (`sign(0) = +1`). The state histogram keeps the signs apart, which is
//! where the pair of near-zero `±eps` states shows up.

use super::{check_bits, max_code, QuantError, QuantOutcome, QuantParams, Scheme};
use crate::tensor::Tensor;

fn log_magnitudes(input: &Tensor, epsilon: f64) -> Vec<f64> {
    input.data().iter().map(|w| (w.abs() + epsilon).ln()).collect()
}

pub(crate) fn fit_log_params(
    input: &Tensor,
    bits: u32,
    epsilon: f64,
) -> Result<QuantParams, QuantError> {
    if input.is_empty() {
        return Err(QuantError::EmptyTensor);
    }
    check_bits(bits)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(QuantError::InvalidParams(format!("epsilon must be > 0, got {epsilon}")));
    }
    let mags = log_magnitudes(input, epsilon);
    let lo = mags.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = mags.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let alpha = if hi > lo { (hi - lo) / max_code(bits) as f64 } else { 1.0 };
    Ok(QuantParams {
        epsilon,
        ..QuantParams::new(Scheme::LogMinMax, bits, alpha, lo)
    })
}

pub(crate) fn quantize_log(input: &Tensor, params: &QuantParams) -> Result<QuantOutcome, QuantError> {
    let eps = params.epsilon;
    let mags = log_magnitudes(input, eps);
    let negative: Vec<bool> = input.data().iter().map(|&w| w < 0.0).collect();

    if mags.iter().all(|&m| m == mags[0]) {
        // Every magnitude is the same: nothing to scale.
        let codes = vec![0; input.len()];
        return Ok(QuantOutcome::build(input, input.data().to_vec(), codes, Some(&negative)));
    }
    if params.alpha <= 0.0 {
        return Err(QuantError::InvalidParams(format!(
            "alpha must be > 0 for log on non-constant magnitudes, got {}",
            params.alpha
        )));
    }

    let top = params.max_code() as f64;
    let mut codes = Vec::with_capacity(input.len());
    let quantized = mags
        .iter()
        .zip(&negative)
        .map(|(&m, &neg)| {
            let z = ((m - params.beta) / params.alpha).round().clamp(0.0, top);
            codes.push(z as u32);
            let magnitude = ((params.alpha * z + params.beta).exp() - eps).max(0.0);
            if neg {
                -magnitude
            } else {
                magnitude
            }
        })
        .collect();
    Ok(QuantOutcome::build(input, quantized, codes, Some(&negative)))
}

/// Fit log-minmax parameters to `input` and quantize it.
pub fn log_quantize(input: &Tensor, bits: u32, epsilon: f64) -> Result<QuantOutcome, QuantError> {
    let params = fit_log_params(input, bits, epsilon)?;
    quantize_log(input, &params)
}
