//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes plain numbers and strings and returns a JSON string.
//! The same functions are available natively through [`api`].

pub mod api;

use wasm_bindgen::prelude::*;

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

/// Quantize a synthetic weight tensor. `kind` is gaussian, uniform or bimodal.
#[wasm_bindgen]
pub fn quantize_preview(kind: &str, n: u32, sigma: f64, seed: u32, scheme: &str, bits: u32, bins: u32) -> Result<String, JsError> {
    js(api::quantize_preview(kind, n as usize, sigma, seed as u64, scheme, bits, bins as usize))
}

/// EM iterations against the minmax starting point.
#[wasm_bindgen]
pub fn em_trace(kind: &str, n: u32, sigma: f64, seed: u32, bits: u32) -> Result<String, JsError> {
    js(api::em_trace(kind, n as usize, sigma, seed as u64, bits))
}

/// Train the toy GAN; `d_bits` or `g_bits` of 0 means full precision.
#[wasm_bindgen]
pub fn train_gan(d_bits: u32, g_bits: u32, scheme: &str, steps: u32, seed: u32) -> Result<String, JsError> {
    js(api::train_gan(d_bits, g_bits, scheme, steps as usize, seed as u64))
}
