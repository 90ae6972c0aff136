use serde::{Deserialize, Serialize};

use super::{max_code, QuantOutcome};

/// How well the quantized states cover the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilizationReport {
    pub bits: u32,
    pub states_used: usize,
    /// Distinct signed states (differs from `states_used` only for log-Q).
    pub signed_states_used: usize,
    /// Shannon entropy of the state occupancy, in nats.
    pub entropy: f64,
    /// Fraction of elements in code 0 or code `2^k - 1`.
    pub extremum_mass: f64,
    pub l2_error: f64,
}

pub fn quant_report(outcome: &QuantOutcome, bits: u32) -> UtilizationReport {
    let n = outcome.codes.len() as f64;
    let top = max_code(bits);
    let entropy = outcome
        .state_histogram
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum::<f64>()
        .max(0.0);
    let extremes = outcome.codes.iter().filter(|&&z| z == 0 || z == top).count();
    UtilizationReport {
        bits,
        states_used: outcome.states_used,
        signed_states_used: outcome.state_histogram.len(),
        entropy,
        extremum_mass: if n > 0.0 { extremes as f64 / n } else { 0.0 },
        l2_error: outcome.l2_error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quant::{em_fit, fit_and_quantize, EmOptions, QuantOptions, Scheme};
    use crate::tensor::Tensor;

    #[test]
    fn constant_has_zero_entropy() {
        let w = Tensor::from_vec("w", vec![2.0; 5]).unwrap();
        let f = fit_and_quantize(&w, Scheme::MinMax, 3, &QuantOptions::default()).unwrap();
        let r = quant_report(&f.outcome, 3);
        assert_eq!(r.states_used, 1);
        assert_eq!(r.entropy, 0.0);
    }

    #[test]
    fn two_equal_states_have_ln2_entropy() {
        let w = Tensor::from_vec("w", vec![-1.0, -1.0, 1.0, 1.0]).unwrap();
        let (_, out, _) = em_fit(&w, 1, &EmOptions::default()).unwrap();
        let r = quant_report(&out, 1);
        assert_eq!(r.states_used, 2);
        assert!((r.entropy - std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(r.extremum_mass, 1.0);
    }
}
