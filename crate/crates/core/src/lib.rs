//! Weight quantization for small GANs.
//!
//! - [`quant`]: minmax, log-minmax, tanh and EM-fitted linear quantizers.
//! - [`store`]: QGW1 weight archives, histogram CSV export, synthetic tensors.
//! - [`gan`]: MLP generator/discriminator on a Gaussian ring with
//!   quantization-aware training and a mode-coverage quality score.
//! - [`search`]: multi-precision bit-width search and sensitivity sweeps.

pub mod gan;
pub mod quant;
pub mod search;
pub mod seed;
pub mod store;
pub mod tensor;

pub use tensor::{Tensor, TensorError};
