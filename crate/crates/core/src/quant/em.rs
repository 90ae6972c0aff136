//! EM fitting of the linear quantizer `w ≈ alpha * z + beta`.
//!
//! The E-step assigns each weight its nearest code under the current
//! `(alpha, beta)`; the M-step solves the least-squares problem for
//! `(alpha, beta)` with the codes held fixed. Each half-step can only lower
//! `sum (w - alpha z - beta)^2`, so the objective is monotone. Fitting
//! starts from the minmax parameters, which makes the result at least as
//! good as minmax-Q.

use serde::{Deserialize, Serialize};

use super::linear::{linear_code, minmax_params, quantize_linear};
use super::{check_bits, max_code, QuantError, QuantOutcome, QuantParams, Scheme};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmOptions {
    pub max_iter: usize,
    /// Stop when the relative objective change falls below this.
    pub tol: f64,
}

impl Default for EmOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmIteration {
    pub alpha: f64,
    pub beta: f64,
    /// `sum (w - alpha z - beta)^2` after this step's M-step.
    pub objective: f64,
    /// All codes were equal, so alpha was carried over.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EmTrace {
    pub iterations: Vec<EmIteration>,
    pub converged: bool,
    pub steps_taken: usize,
}

impl EmTrace {
    pub fn objectives(&self) -> impl Iterator<Item = f64> + '_ {
        self.iterations.iter().map(|it| it.objective)
    }
}

/// Nearest code for every weight: `clamp(round((w - beta) / alpha), 0, 2^k - 1)`.
pub fn em_estep(input: &Tensor, alpha: f64, beta: f64, bits: u32) -> Result<Vec<u32>, QuantError> {
    check_bits(bits)?;
    if !(alpha > 0.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(QuantError::InvalidParams(format!(
            "E-step needs finite alpha > 0, got alpha={alpha} beta={beta}"
        )));
    }
    let top = max_code(bits) as f64;
    Ok(input
        .data()
        .iter()
        .map(|&w| linear_code(w, alpha, beta, top) as u32)
        .collect())
}

/// Least-squares `(alpha, beta)` for fixed codes:
/// `alpha = cov(w, z) / var(z)`, `beta = E[w] - alpha E[z]`.
///
/// The moments are accumulated around the means, which is algebraically the
/// same as `E[wz] - E[w]E[z]` but does not cancel catastrophically.
pub fn em_mstep(input: &Tensor, codes: &[u32]) -> Result<(f64, f64), QuantError> {
    if codes.len() != input.len() {
        return Err(QuantError::CodeLengthMismatch {
            codes: codes.len(),
            input: input.len(),
        });
    }
    if input.is_empty() {
        return Err(QuantError::EmptyTensor);
    }
    let n = input.len() as f64;
    let mean_w = input.mean();
    let mean_z = codes.iter().map(|&z| z as f64).sum::<f64>() / n;
    let (mut cov, mut var) = (0.0, 0.0);
    for (&w, &z) in input.data().iter().zip(codes) {
        let dz = z as f64 - mean_z;
        cov += (w - mean_w) * dz;
        var += dz * dz;
    }
    if var == 0.0 {
        return Err(QuantError::DegenerateCodes);
    }
    let alpha = cov / var;
    Ok((alpha, mean_w - alpha * mean_z))
}

/// `sum_i (w_i - alpha z_i - beta)^2`.
pub fn linear_objective(input: &Tensor, codes: &[u32], alpha: f64, beta: f64) -> f64 {
    input
        .data()
        .iter()
        .zip(codes)
        .map(|(&w, &z)| {
            let r = w - (alpha * z as f64 + beta);
            r * r
        })
        .sum()
}

/// Fit `(alpha, beta)` by EM and quantize.
///
/// Stops when the codes stop changing, when the relative objective change
/// drops below `tol`, or after `max_iter` steps. Constant input returns the
/// exact single-state representation without iterating.
pub fn em_fit(
    input: &Tensor,
    bits: u32,
    options: &EmOptions,
) -> Result<(QuantParams, QuantOutcome, EmTrace), QuantError> {
    if input.is_empty() {
        return Err(QuantError::EmptyTensor);
    }
    check_bits(bits)?;
    if options.max_iter == 0 || !(options.tol > 0.0) {
        return Err(QuantError::InvalidParams(
            "EM needs max_iter >= 1 and tol > 0".into(),
        ));
    }

    let init = minmax_params(input, bits);
    if input.is_constant() {
        let params = QuantParams { scheme: Scheme::EmLinear, ..init };
        let trace = EmTrace {
            converged: true,
            ..EmTrace::default()
        };
        return Ok((params, QuantOutcome::identity(input), trace));
    }

    let (mut alpha, mut beta) = (init.alpha, init.beta);
    let mut prev_codes: Option<Vec<u32>> = None;
    let mut prev_objective = {
        let codes = em_estep(input, alpha, beta, bits)?;
        linear_objective(input, &codes, alpha, beta)
    };
    let mut trace = EmTrace::default();

    for _ in 0..options.max_iter {
        let codes = em_estep(input, alpha, beta, bits)?;
        if prev_codes.as_deref() == Some(codes.as_slice()) {
            trace.converged = true;
            break;
        }
        let (next_alpha, next_beta, degenerate) = match em_mstep(input, &codes) {
            Ok((a, b)) => (a, b, false),
            Err(QuantError::DegenerateCodes) => {
                let mean_z = codes[0] as f64;
                (alpha, input.mean() - alpha * mean_z, true)
            }
            Err(e) => return Err(e),
        };
        let objective = linear_objective(input, &codes, next_alpha, next_beta);
        trace.iterations.push(EmIteration {
            alpha: next_alpha,
            beta: next_beta,
            objective,
            degenerate,
        });
        alpha = next_alpha;
        beta = next_beta;

        let change = if prev_objective > 0.0 {
            (prev_objective - objective).abs() / prev_objective
        } else {
            0.0
        };
        prev_objective = objective;
        prev_codes = Some(codes);
        if change < options.tol {
            trace.converged = true;
            break;
        }
    }
    trace.steps_taken = trace.iterations.len();

    let params = QuantParams::new(Scheme::EmLinear, bits, alpha, beta);
    let outcome = quantize_linear(input, &params)?;
    Ok((params, outcome, trace))
}
