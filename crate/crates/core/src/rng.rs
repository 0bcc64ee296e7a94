//! Seed derivation for independent, reproducible random streams.
//!
//! Every stream is a ChaCha8 generator seeded from a 64-bit value derived by
//! hashing the caller's seed with stream indices:
//!
//! ```text
//! splitmix64(x) = z3 where
//!     z0 = x + 0x9E3779B97F4A7C15                 (wrapping)
//!     z1 = (z0 ^ (z0 >> 30)) * 0xBF58476D1CE4E5B9 (wrapping)
//!     z2 = (z1 ^ (z1 >> 27)) * 0x94D049BB133111EB (wrapping)
//!     z3 = z2 ^ (z2 >> 31)
//! mix(seed, i) = splitmix64(seed ^ splitmix64(i))
//! ```
//!
//! Multi-index streams nest: `mix(mix(seed, p), b)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of substream `index` of `seed`.
pub fn mix(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
