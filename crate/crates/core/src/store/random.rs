use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::seed::{rng_for, Stream};
use crate::tensor::Tensor;

pub const DEFAULT_SIGMA: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TensorKind {
    /// `N(0, sigma^2)`.
    Gaussian,
    /// Uniform on `[-sqrt(3) sigma, sqrt(3) sigma]` (standard deviation `sigma`).
    Uniform,
    /// Equal mixture of `N(-3 sigma, sigma^2)` and `N(3 sigma, sigma^2)`.
    Bimodal,
}

/// Deterministic synthetic weights with scale [`DEFAULT_SIGMA`].
pub fn random_tensor(kind: TensorKind, n: usize, seed: u64) -> Tensor {
    random_tensor_with_sigma(kind, n, seed, DEFAULT_SIGMA)
}

/// # Panics
///
/// If `n == 0` or `sigma` is not finite and positive.
pub fn random_tensor_with_sigma(kind: TensorKind, n: usize, seed: u64, sigma: f64) -> Tensor {
    assert!(n >= 1, "random_tensor needs n >= 1");
    assert!(sigma > 0.0 && sigma.is_finite(), "sigma must be positive");
    let mut rng = rng_for(seed, Stream::Tensor);
    let normal = Normal::new(0.0, sigma).expect("valid sigma");
    let data: Vec<f64> = match kind {
        TensorKind::Gaussian => (0..n).map(|_| normal.sample(&mut rng)).collect(),
        TensorKind::Uniform => {
            let half = sigma * 3f64.sqrt();
            let u = Uniform::new_inclusive(-half, half).expect("valid range");
            (0..n).map(|_| u.sample(&mut rng)).collect()
        }
        TensorKind::Bimodal => (0..n)
            .map(|_| {
                let center = if rng.random_bool(0.5) { 3.0 * sigma } else { -3.0 * sigma };
                center + normal.sample(&mut rng)
            })
            .collect(),
    };
    Tensor::from_vec(format!("{kind:?}").to_lowercase(), data).expect("finite samples")
}
