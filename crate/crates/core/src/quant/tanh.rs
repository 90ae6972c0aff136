//! Tanh quantization.
//!
//! `f(x) = (tanh(x) + 1) / 2 * (2^k - 1)`, rounded, then mapped back with
//! `atanh(2z / (2^k - 1) - 1)`. The end codes would map to `±inf`, so the
//! inverse argument is clamped to `[-1 + delta, 1 - delta]`.

use super::{check_bits, QuantError, QuantOutcome, QuantParams};
use crate::tensor::Tensor;

pub(crate) fn quantize_tanh(input: &Tensor, params: &QuantParams) -> QuantOutcome {
    let top = params.max_code() as f64;
    let limit = 1.0 - params.saturation_delta;
    let mut codes = Vec::with_capacity(input.len());
    let quantized = input
        .data()
        .iter()
        .map(|&x| {
            let z = ((x.tanh() + 1.0) / 2.0 * top).round().clamp(0.0, top);
            codes.push(z as u32);
            let y = 2.0 * z / top - 1.0;
            y.abs().min(limit).atanh().copysign(y)
        })
        .collect();
    QuantOutcome::build(input, quantized, codes, None)
}

pub fn tanh_quantize(
    input: &Tensor,
    bits: u32,
    saturation_delta: f64,
) -> Result<QuantOutcome, QuantError> {
    if input.is_empty() {
        return Err(QuantError::EmptyTensor);
    }
    check_bits(bits)?;
    let params = QuantParams::tanh(bits, saturation_delta);
    params.validate()?;
    Ok(quantize_tanh(input, &params))
}
