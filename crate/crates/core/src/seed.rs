//! Deterministic seed derivation.
//!
//! Every stochastic component in this crate draws from a [`rand_chacha::ChaCha8Rng`]
//! seeded through these helpers, so a single user-facing seed fans out into
//! decorrelated per-member, per-iteration, and per-sample streams without any
//! shared mutable RNG state.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer. Bijective on u64, good avalanche behavior.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a base seed with a stream tag into a decorrelated derived seed.
pub fn mix(base: u64, stream: u64) -> u64 {
    splitmix64(base ^ splitmix64(stream))
}

/// Mixes a base seed with two stream tags (e.g. member index and iteration).
pub fn mix2(base: u64, a: u64, b: u64) -> u64 {
    mix(mix(base, a), b)
}

/// A ChaCha8 generator for the given seed.
pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
