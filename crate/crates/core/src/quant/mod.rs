//! Weight quantizers.
//!
//! Every scheme follows the same pipeline: scale each weight into the code
//! space `[0, 2^k - 1]`, round to an integer code, and map the code back to
//! the weight domain. The schemes differ only in the scaling function:
//!
//! - [`Scheme::MinMax`]: affine map fixed by the tensor's min and max.
//! - [`Scheme::LogMinMax`]: min/max scaling of `ln(|w| + eps)`, sign reattached.
//! - [`Scheme::Tanh`]: `(tanh(w) + 1) / 2` squashing, rescaled through `atanh`.
//! - [`Scheme::EmLinear`]: affine map `w = alpha * z + beta` whose parameters
//!   are fitted by alternating code assignment and least squares ([`em_fit`]).
//!
//! Rounding is half-away-from-zero everywhere ([`f64::round`]).

mod em;
mod linear;
mod log;
mod report;
mod tanh;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor::{Tensor, TensorError};

pub use em::{em_estep, em_fit, em_mstep, linear_objective, EmIteration, EmOptions, EmTrace};
pub use linear::{minmax_scale, MinMaxScale};
pub use log::log_quantize;
pub use report::{quant_report, UtilizationReport};
pub use tanh::tanh_quantize;

pub const MIN_BITS: u32 = 1;
pub const MAX_BITS: u32 = 16;
pub const DEFAULT_EPSILON: f64 = 1e-7;
pub const DEFAULT_SATURATION_DELTA: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantError {
    #[error("cannot quantize an empty tensor")]
    EmptyTensor,
    #[error("invalid quantization parameters: {0}")]
    InvalidParams(String),
    #[error("input range is zero (max == min)")]
    ZeroRange,
    #[error("all codes are equal; scale is undetermined")]
    DegenerateCodes,
    #[error("codes length {codes} does not match input length {input}")]
    CodeLengthMismatch { codes: usize, input: usize },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[serde(rename = "minmax")]
    MinMax,
    #[serde(rename = "log")]
    LogMinMax,
    Tanh,
    #[serde(rename = "em")]
    EmLinear,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::MinMax, Scheme::LogMinMax, Scheme::Tanh, Scheme::EmLinear];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::MinMax => "minmax",
            Scheme::LogMinMax => "log",
            Scheme::Tanh => "tanh",
            Scheme::EmLinear => "em",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "minmax" => Ok(Scheme::MinMax),
            "log" => Ok(Scheme::LogMinMax),
            "tanh" => Ok(Scheme::Tanh),
            "em" => Ok(Scheme::EmLinear),
            other => Err(format!("unknown scheme `{other}` (expected minmax|log|tanh|em)")),
        }
    }
}

/// Parameters of a fitted quantizer.
///
/// `alpha`/`beta` are the affine code-to-value map for `MinMax` and
/// `EmLinear`, and the same map in the log-magnitude domain for
/// `LogMinMax`. `Tanh` ignores them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantParams {
    pub scheme: Scheme,
    pub bits: u32,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub saturation_delta: f64,
}

impl QuantParams {
    pub fn new(scheme: Scheme, bits: u32, alpha: f64, beta: f64) -> Self {
        Self {
            scheme,
            bits,
            alpha,
            beta,
            epsilon: DEFAULT_EPSILON,
            saturation_delta: DEFAULT_SATURATION_DELTA,
        }
    }

    pub fn tanh(bits: u32, saturation_delta: f64) -> Self {
        Self {
            saturation_delta,
            ..Self::new(Scheme::Tanh, bits, 1.0, 0.0)
        }
    }

    /// Largest code, `2^k - 1`.
    pub fn max_code(&self) -> u32 {
        max_code(self.bits)
    }

    pub fn state_count(&self) -> u64 {
        1u64 << self.bits
    }

    /// Checks everything that does not depend on the data.
    pub fn validate(&self) -> Result<(), QuantError> {
        check_bits(self.bits)?;
        if !self.alpha.is_finite() || !self.beta.is_finite() {
            return Err(QuantError::InvalidParams("alpha and beta must be finite".into()));
        }
        match self.scheme {
            Scheme::LogMinMax if !(self.epsilon > 0.0 && self.epsilon.is_finite()) => Err(
                QuantError::InvalidParams(format!("epsilon must be > 0, got {}", self.epsilon)),
            ),
            Scheme::Tanh if !(self.saturation_delta > 0.0 && self.saturation_delta < 1.0) => {
                Err(QuantError::InvalidParams(format!(
                    "saturation delta must lie in (0, 1), got {}",
                    self.saturation_delta
                )))
            }
            _ => Ok(()),
        }
    }
}

pub fn check_bits(bits: u32) -> Result<(), QuantError> {
    if (MIN_BITS..=MAX_BITS).contains(&bits) {
        Ok(())
    } else {
        Err(QuantError::InvalidParams(format!(
            "bits must lie in [{MIN_BITS}, {MAX_BITS}], got {bits}"
        )))
    }
}

pub(crate) fn max_code(bits: u32) -> u32 {
    (1u32 << bits) - 1
}

/// Result of quantizing one tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantOutcome {
    pub quantized: Tensor,
    pub codes: Vec<u32>,
    /// Sum of squared differences between input and `quantized`.
    pub l2_error: f64,
    /// Number of distinct codes occupied.
    pub states_used: usize,
    /// Occupancy per state. Keys are codes, except for log-Q where
    /// negative weights are keyed `-(code + 1)` so the two signed copies of
    /// each magnitude state are counted separately.
    pub state_histogram: BTreeMap<i64, usize>,
}

impl QuantOutcome {
    pub(crate) fn build(
        input: &Tensor,
        quantized: Vec<f64>,
        codes: Vec<u32>,
        negative: Option<&[bool]>,
    ) -> Self {
        let l2_error = sum_squared_diff(input.data(), &quantized);
        let mut state_histogram = BTreeMap::new();
        for (i, &code) in codes.iter().enumerate() {
            let key = match negative {
                Some(neg) if neg[i] => -(code as i64) - 1,
                _ => code as i64,
            };
            *state_histogram.entry(key).or_insert(0) += 1;
        }
        let distinct: std::collections::BTreeSet<i64> = state_histogram
            .keys()
            .map(|&k| if k < 0 { -k - 1 } else { k })
            .collect();
        Self {
            quantized: input.with_data(quantized),
            codes,
            l2_error,
            states_used: distinct.len(),
            state_histogram,
        }
    }

    /// Degenerate case: every element reproduced exactly with code 0.
    pub(crate) fn identity(input: &Tensor) -> Self {
        Self::build(input, input.data().to_vec(), vec![0; input.len()], None)
    }
}

pub(crate) fn sum_squared_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Quantize `input` with already-fitted `params`.
///
/// Range-based schemes (`MinMax`, `EmLinear`, and `LogMinMax` in the
/// magnitude domain) return the input unchanged when it has zero range.
/// For fixed params the map is idempotent.
pub fn quantize(input: &Tensor, params: &QuantParams) -> Result<QuantOutcome, QuantError> {
    if input.is_empty() {
        return Err(QuantError::EmptyTensor);
    }
    params.validate()?;
    match params.scheme {
        Scheme::MinMax | Scheme::EmLinear => linear::quantize_linear(input, params),
        Scheme::LogMinMax => log::quantize_log(input, params),
        Scheme::Tanh => Ok(tanh::quantize_tanh(input, params)),
    }
}

/// Tunables for [`fit_and_quantize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantOptions {
    pub epsilon: f64,
    pub saturation_delta: f64,
    pub em: EmOptions,
}

impl Default for QuantOptions {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            saturation_delta: DEFAULT_SATURATION_DELTA,
            em: EmOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fitted {
    pub params: QuantParams,
    pub outcome: QuantOutcome,
    /// Present only for the EM scheme.
    pub trace: Option<EmTrace>,
}

/// Fit the parameters of `scheme` to `input` and quantize it.
pub fn fit_and_quantize(
    input: &Tensor,
    scheme: Scheme,
    bits: u32,
    options: &QuantOptions,
) -> Result<Fitted, QuantError> {
    if input.is_empty() {
        return Err(QuantError::EmptyTensor);
    }
    check_bits(bits)?;
    let fitted = match scheme {
        Scheme::MinMax => {
            let params = linear::minmax_params(input, bits);
            let outcome = quantize(input, &params)?;
            Fitted { params, outcome, trace: None }
        }
        Scheme::LogMinMax => {
            let params = log::fit_log_params(input, bits, options.epsilon)?;
            let outcome = quantize(input, &params)?;
            Fitted { params, outcome, trace: None }
        }
        Scheme::Tanh => {
            let params = QuantParams::tanh(bits, options.saturation_delta);
            let outcome = quantize(input, &params)?;
            Fitted { params, outcome, trace: None }
        }
        Scheme::EmLinear => {
            let (params, outcome, trace) = em_fit(input, bits, &options.em)?;
            Fitted { params, outcome, trace: Some(trace) }
        }
    };
    Ok(fitted)
}
