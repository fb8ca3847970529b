//! Seed derivation and named random streams.
//!
//! Every random draw comes from ChaCha20 keyed by a 64-bit seed, with a
//! separate ChaCha stream per purpose, so the design points, the noise and
//! the coefficient tables of one experiment never share randomness and can
//! be varied independently.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Distinct purposes of randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Design = 1,
    Noise = 2,
    Coefficients = 3,
    Init = 4,
    Partition = 5,
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive hash of a master seed and a tuple of indices.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix64(master), |h, &p| mix64(h ^ mix64(p.wrapping_add(0x632B_E59B_D9B4_E019))))
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha20Rng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(stream as u64);
    r
}
