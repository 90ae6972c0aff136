use serde::{Deserialize, Serialize};

use super::SearchError;
use crate::gan::QualityScore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunClass {
    Convergent,
    Unstable,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    /// A run whose best score stays below this never got going.
    pub fail_threshold: f64,
    /// Oscillation only counts once the run has reached this score.
    pub pass_threshold: f64,
    /// Minimum peak-to-trough swing over the last quartile.
    pub swing: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self { fail_threshold: 0.15, pass_threshold: 0.5, swing: 0.25 }
    }
}

pub fn classify_run(history: &[QualityScore], config: &ClassifierConfig) -> Result<RunClass, SearchError> {
    let scores: Vec<f64> = history.iter().map(|q| q.score).collect();
    classify_scores(&scores, config)
}

/// Failed when the best score is below `fail_threshold`. Unstable when the
/// best score reaches `pass_threshold` and the last quartile (at least two
/// entries) is non-monotone with a peak-to-trough range of at least `swing`.
/// Convergent otherwise.
pub fn classify_scores(scores: &[f64], config: &ClassifierConfig) -> Result<RunClass, SearchError> {
    if scores.len() < 4 {
        return Err(SearchError::TooShort(scores.len()));
    }
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if best < config.fail_threshold {
        return Ok(RunClass::Failed);
    }
    let tail_len = scores.len().div_ceil(4).max(2);
    let tail = &scores[scores.len() - tail_len..];
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let rising = tail.windows(2).all(|w| w[1] >= w[0]);
    let falling = tail.windows(2).all(|w| w[1] <= w[0]);
    if best >= config.pass_threshold && hi - lo >= config.swing && !rising && !falling {
        Ok(RunClass::Unstable)
    } else {
        Ok(RunClass::Convergent)
    }
}
