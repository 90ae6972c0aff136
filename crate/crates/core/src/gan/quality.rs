//! Mode-coverage quality score.
//!
//! A sample is high quality when both of its coordinates lie within
//! `3 sigma` of some mode center (a square window; per-axis mass 0.9973,
//! joint 0.9946 for an exact sample). A mode is covered when at least [`COVERAGE_SHARE`] of all samples
//! are high-quality hits on it. `score = covered / modes * hq_fraction`.

use serde::{Deserialize, Serialize};

use super::dataset::RingDataset;

pub const COVERAGE_SHARE: f64 = 0.02;
pub const HQ_RADIUS_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityScore {
    pub covered_modes: usize,
    pub mode_count: usize,
    pub hq_fraction: f64,
    pub score: f64,
}

impl QualityScore {
    pub fn zero(mode_count: usize) -> Self {
        Self {
            covered_modes: 0,
            mode_count,
            hq_fraction: 0.0,
            score: 0.0,
        }
    }
}

/// Score 2-D points given as a flat `[x0, y0, x1, y1, ...]` slice.
pub fn quality_of_samples(points: &[f64], dataset: &RingDataset) -> QualityScore {
    let n = points.len() / 2;
    if n == 0 || dataset.mode_count == 0 {
        return QualityScore::zero(dataset.mode_count);
    }
    let centers = dataset.centers();
    let window = HQ_RADIUS_SIGMAS * dataset.sigma;
    let mut hits = vec![0usize; centers.len()];
    for p in points.chunks_exact(2) {
        let hit = centers
            .iter()
            .position(|c| (p[0] - c[0]).abs() <= window && (p[1] - c[1]).abs() <= window);
        if let Some(k) = hit {
            hits[k] += 1;
        }
    }
    let hq = hits.iter().sum::<usize>();
    let threshold = COVERAGE_SHARE * n as f64;
    let covered_modes = hits.iter().filter(|&&h| h > 0 && h as f64 >= threshold).count();
    let hq_fraction = hq as f64 / n as f64;
    QualityScore {
        covered_modes,
        mode_count: dataset.mode_count,
        hq_fraction,
        score: covered_modes as f64 / dataset.mode_count as f64 * hq_fraction,
    }
}
