//! Deterministic rng stream derivation.
//!
//! Every run derives one independent stream per player plus one environment
//! stream (initial states, transitions, stopping draws) from the run seed.
//! Streams are keyed by index so adding or removing instrumentation never
//! perturbs the draws of an existing stream.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream index reserved for the environment (episode dynamics).
pub const ENV_STREAM: u64 = u64::MAX;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the rng stream `index` of a run identified by `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(index)))
}

/// Stream owned by player `i`.
pub fn player_stream(seed: u64, player: usize) -> ChaCha8Rng {
    stream(seed, player as u64)
}

/// Stream owned by the environment.
pub fn env_stream(seed: u64) -> ChaCha8Rng {
    stream(seed, ENV_STREAM)
}
