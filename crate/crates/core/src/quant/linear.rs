//! Affine code maps shared by minmax-Q and the EM quantizer.

use super::{max_code, QuantError, QuantOutcome, QuantParams, Scheme};
use crate::tensor::Tensor;

/// Output of [`minmax_scale`]: the scaled values in `[0, 2^k - 1]` and the
/// equivalent affine parameters, `scaled = (x - beta) / alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScale {
    pub scaled: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
}

/// `(x - min) / (max - min) * (2^k - 1)` for every element.
///
/// Returns [`QuantError::ZeroRange`] for constant input.
pub fn minmax_scale(input: &Tensor, bits: u32) -> Result<MinMaxScale, QuantError> {
    if input.is_empty() {
        return Err(QuantError::EmptyTensor);
    }
    super::check_bits(bits)?;
    let (lo, hi) = (input.min(), input.max());
    let range = hi - lo;
    if range == 0.0 {
        return Err(QuantError::ZeroRange);
    }
    let levels = max_code(bits) as f64;
    let scaled = input.data().iter().map(|&x| (x - lo) / range * levels).collect();
    Ok(MinMaxScale {
        scaled,
        alpha: range / levels,
        beta: lo,
    })
}

/// MinMax parameters for `input`. Constant input gets `alpha = 1,
/// beta = c`, which reproduces it exactly with code 0.
pub(crate) fn minmax_params(input: &Tensor, bits: u32) -> QuantParams {
    match minmax_scale(input, bits) {
        Ok(s) => QuantParams::new(Scheme::MinMax, bits, s.alpha, s.beta),
        Err(_) => QuantParams::new(Scheme::MinMax, bits, 1.0, input.data()[0]),
    }
}

#[inline]
pub(crate) fn linear_code(w: f64, alpha: f64, beta: f64, max_code: f64) -> f64 {
    ((w - beta) / alpha).round().clamp(0.0, max_code)
}

pub(crate) fn quantize_linear(
    input: &Tensor,
    params: &QuantParams,
) -> Result<QuantOutcome, QuantError> {
    if input.is_constant() {
        return Ok(QuantOutcome::identity(input));
    }
    if params.alpha <= 0.0 {
        return Err(QuantError::InvalidParams(format!(
            "alpha must be > 0 for {} on non-constant data, got {}",
            params.scheme, params.alpha
        )));
    }
    let top = params.max_code() as f64;
    let (alpha, beta) = (params.alpha, params.beta);
    let mut codes = Vec::with_capacity(input.len());
    let quantized = input
        .data()
        .iter()
        .map(|&w| {
            let z = linear_code(w, alpha, beta, top);
            codes.push(z as u32);
            alpha * z + beta
        })
        .collect();
    Ok(QuantOutcome::build(input, quantized, codes, None))
}
