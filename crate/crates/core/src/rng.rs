//! Deterministic random streams.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] whose seed is a
//! hash of a master seed and a short path of integer labels, e.g.
//! `(seed, method, sweep, trial)`. Streams for different labels are
//! independent, so trials can be evaluated on any number of workers and still
//! give the same numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use rand_chacha::ChaCha8Rng as StreamRng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a 64-bit sub-seed from a master seed and a label path.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &label| splitmix64(acc ^ splitmix64(label.wrapping_add(0x5851_F42D_4C95_7F2D))))
}

/// Random stream for a master seed and a label path.
pub fn stream(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}
