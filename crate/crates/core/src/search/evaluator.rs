use std::fmt;

use serde::{Deserialize, Serialize};

use crate::gan::{train, GanConfig, GanError, HistoryEntry, QualityScore, RingDataset};
use crate::seed::derive_seed;

/// Why an evaluation could not produce a score.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalError(pub String);

impl EvalError {
    pub fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for EvalError {}

impl From<GanError> for EvalError {
    fn from(e: GanError) -> Self {
        Self(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub score: f64,
    /// Present for real training runs.
    pub quality: Option<QualityScore>,
    pub history: Vec<HistoryEntry>,
}

impl Evaluation {
    pub fn from_score(score: f64) -> Self {
        Self { score, quality: None, history: Vec::new() }
    }
}

/// Scores one configuration. `None` means full precision for that network.
/// Implementations must be deterministic in their arguments.
pub trait Evaluator: Sync {
    fn evaluate(&self, d_bits: Option<u32>, g_bits: Option<u32>, seed: u64) -> Result<Evaluation, EvalError>;
}

impl<E: Evaluator + ?Sized> Evaluator for &E {
    fn evaluate(&self, d: Option<u32>, g: Option<u32>, seed: u64) -> Result<Evaluation, EvalError> {
        (**self).evaluate(d, g, seed)
    }
}

/// Adapts a closure.
pub struct FnEvaluator<F>(pub F);

impl<F> Evaluator for FnEvaluator<F>
where
    F: Fn(Option<u32>, Option<u32>, u64) -> Result<Evaluation, EvalError> + Sync,
{
    fn evaluate(&self, d: Option<u32>, g: Option<u32>, seed: u64) -> Result<Evaluation, EvalError> {
        (self.0)(d, g, seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantMock(pub f64);

impl Evaluator for ConstantMock {
    fn evaluate(&self, _: Option<u32>, _: Option<u32>, _: u64) -> Result<Evaluation, EvalError> {
        Ok(Evaluation::from_score(self.0))
    }
}

/// `min(g_slope * k_g, 1)` when G is quantized, otherwise
/// `min(d_slope * k_d, 1)`, and 1 when both are full precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearMock {
    pub d_slope: f64,
    pub g_slope: f64,
}

impl Evaluator for LinearMock {
    fn evaluate(&self, d: Option<u32>, g: Option<u32>, _: u64) -> Result<Evaluation, EvalError> {
        let score = match (d, g) {
            (_, Some(k)) => self.g_slope * k as f64,
            (Some(k), None) => self.d_slope * k as f64,
            (None, None) => 1.0,
        };
        Ok(Evaluation::from_score(score.min(1.0)))
    }
}

/// Trains the toy GAN and scores the final generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GanEvaluator {
    /// Template; its bit-widths and seed are overridden per call.
    pub config: GanConfig,
    pub dataset: RingDataset,
}

impl Evaluator for GanEvaluator {
    fn evaluate(&self, d_bits: Option<u32>, g_bits: Option<u32>, seed: u64) -> Result<Evaluation, EvalError> {
        let config = GanConfig { d_bits, g_bits, seed, ..self.config.clone() };
        let (_, history) = train(&config, &self.dataset)?;
        let quality = history.last().map(|h| h.quality).unwrap_or_else(|| QualityScore::zero(self.dataset.mode_count));
        Ok(Evaluation { score: quality.score, quality: Some(quality), history })
    }
}

/// Runs the inner evaluator `repeats` times and reports the median score.
/// Repeat 0 uses the given seed, repeat `i > 0` uses `derive_seed(seed, i)`.
/// The returned history and quality are those of the run whose score is the
/// (lower) median.
#[derive(Debug, Clone, PartialEq)]
pub struct Repeated<E> {
    pub inner: E,
    pub repeats: usize,
}

impl<E: Evaluator> Evaluator for Repeated<E> {
    fn evaluate(&self, d: Option<u32>, g: Option<u32>, seed: u64) -> Result<Evaluation, EvalError> {
        if self.repeats == 0 {
            return Err(EvalError::new("repeat count must be positive"));
        }
        let mut runs = (0..self.repeats)
            .map(|i| {
                let s = if i == 0 { seed } else { derive_seed(seed, i as u64) };
                self.inner.evaluate(d, g, s)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let scores: Vec<f64> = runs.iter().map(|r| r.score).collect();
        let score = median(&scores);
        let pick = (runs.len() - 1) / 2;
        runs.sort_by(|a, b| a.score.total_cmp(&b.score));
        let mut eval = runs.swap_remove(pick);
        eval.score = score;
        Ok(eval)
    }
}

/// Median; the mean of the middle pair for even lengths. Panics on empty input.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}
