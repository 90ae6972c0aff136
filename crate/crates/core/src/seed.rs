//! Seed derivation.
//!
//! All randomness comes from one root `u64`. Each subsystem gets its own
//! ChaCha8 stream: the generator is seeded with `seed_from_u64(root)` and
//! then switched to stream number [`Stream`] `as u64`, so the subsystems
//! never share state and adding draws in one cannot shift another.
//! Independent sub-seeds (per repeat, per sweep cell) come from
//! [`derive_seed`], a SplitMix64 mix of the root and a salt.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    /// Real-data sampling.
    Data = 1,
    /// Weight initialization.
    Init = 2,
    /// Noise batches during training.
    Train = 3,
    /// Noise for quality evaluation.
    Eval = 4,
    /// Synthetic tensors.
    Tensor = 5,
}

pub fn rng_for(root: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(stream as u64);
    rng
}

pub fn derive_seed(root: u64, salt: u64) -> u64 {
    let mut z = root ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
