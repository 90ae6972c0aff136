use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::tensor::Tensor;

/// Equal-weight mixture of isotropic Gaussians on a circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingDataset {
    pub mode_count: usize,
    pub radius: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl Default for RingDataset {
    fn default() -> Self {
        Self {
            mode_count: 8,
            radius: 2.0,
            sigma: 0.05,
            seed: 42,
        }
    }
}

impl RingDataset {
    pub fn centers(&self) -> Vec<[f64; 2]> {
        (0..self.mode_count)
            .map(|k| {
                let angle = TAU * k as f64 / self.mode_count as f64;
                [self.radius * angle.cos(), self.radius * angle.sin()]
            })
            .collect()
    }

    /// `n` samples as an `[n, 2]` tensor.
    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> Tensor {
        let centers = self.centers();
        let mut data = Vec::with_capacity(2 * n);
        for _ in 0..n {
            let c = centers[rng.random_range(0..self.mode_count)];
            let dx: f64 = StandardNormal.sample(rng);
            let dy: f64 = StandardNormal.sample(rng);
            data.push(c[0] + self.sigma * dx);
            data.push(c[1] + self.sigma * dy);
        }
        Tensor::new("real", vec![n, 2], data).expect("finite samples")
    }
}
