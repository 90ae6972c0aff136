//! Bit-width search and sensitivity sweeps over a pluggable evaluator.

mod classify;
mod evaluator;
mod sweep;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use classify::{classify_run, classify_scores, ClassifierConfig, RunClass};
pub use evaluator::{
    median, ConstantMock, EvalError, Evaluation, Evaluator, FnEvaluator, GanEvaluator, LinearMock,
    Repeated,
};
pub use sweep::{sensitivity_sweep, write_sweep_csv, SweepCell, SweepMode, SweepResult, SWEEP_HEADER};

use crate::quant::{MAX_BITS, MIN_BITS};

pub const DEFAULT_MAX_BITS: u32 = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("evaluation failed at d_bits={d_bits:?}, g_bits={g_bits:?}: {source}")]
    Evaluator {
        d_bits: Option<u32>,
        g_bits: Option<u32>,
        source: EvalError,
        /// Evaluations completed before the failure.
        trail: Vec<TrailEntry>,
    },
    #[error("sweep cell {mode:?} at {bits} bits failed: {source}")]
    SweepCell { mode: SweepMode, bits: u32, source: EvalError },
    #[error("history has {0} entries, need at least 4")]
    TooShort(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    D,
    G,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrailEntry {
    pub phase: Phase,
    pub d_bits: Option<u32>,
    pub g_bits: Option<u32>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub quality_target: f64,
    pub max_bits: u32,
    /// Last bit-width tried for D (the frozen one when phase 1 succeeded).
    pub d_bits: u32,
    /// Last bit-width tried for G; `None` when phase 2 never ran.
    pub g_bits: Option<u32>,
    pub satisfied: bool,
    pub trail: Vec<TrailEntry>,
}

impl SearchResult {
    pub fn final_score(&self) -> Option<f64> {
        self.trail.last().map(|e| e.score)
    }
}

pub(crate) fn check_bits_arg(name: &str, bits: u32) -> Result<(), SearchError> {
    if (MIN_BITS..=MAX_BITS).contains(&bits) {
        Ok(())
    } else {
        Err(SearchError::InvalidArgument(format!(
            "{name} must lie in [{MIN_BITS}, {MAX_BITS}], got {bits}"
        )))
    }
}

/// Two-phase greedy bit-width search.
///
/// Phase 1 raises the discriminator bit-width from 1 with the generator in
/// full precision until the score reaches `quality`. Phase 2 keeps that
/// discriminator width and raises the generator width from 1 the same way.
/// Each phase gives up after `max_bits`, returning `satisfied = false`.
pub fn multi_precision_search<E: Evaluator + ?Sized>(
    evaluator: &E,
    quality: f64,
    max_bits: u32,
    seed: u64,
) -> Result<SearchResult, SearchError> {
    if !(quality > 0.0 && quality <= 1.0) {
        return Err(SearchError::InvalidArgument(format!(
            "quality target must lie in (0, 1], got {quality}"
        )));
    }
    check_bits_arg("max_bits", max_bits)?;

    let mut trail = Vec::new();
    let run = |phase, d_bits, g_bits, trail: &mut Vec<TrailEntry>| {
        match evaluator.evaluate(d_bits, g_bits, seed) {
            Ok(eval) => {
                trail.push(TrailEntry { phase, d_bits, g_bits, score: eval.score });
                Ok(eval.score)
            }
            Err(source) => Err(SearchError::Evaluator {
                d_bits,
                g_bits,
                source,
                trail: trail.clone(),
            }),
        }
    };
    let result = |d_bits, g_bits, satisfied, trail| SearchResult {
        quality_target: quality,
        max_bits,
        d_bits,
        g_bits,
        satisfied,
        trail,
    };

    let mut k_d = 1;
    while run(Phase::D, Some(k_d), None, &mut trail)? < quality {
        if k_d == max_bits {
            return Ok(result(k_d, None, false, trail));
        }
        k_d += 1;
    }

    let mut k_g = 1;
    while run(Phase::G, Some(k_d), Some(k_g), &mut trail)? < quality {
        if k_g == max_bits {
            return Ok(result(k_d, Some(k_g), false, trail));
        }
        k_g += 1;
    }
    Ok(result(k_d, Some(k_g), true, trail))
}
