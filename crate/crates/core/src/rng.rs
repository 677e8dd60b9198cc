//! Seeded random streams.
//!
//! Every stochastic step draws from a [`SimRng`] derived from a master seed and
//! a path of indices (trial, time step, node id, ...). Sub-streams depend only on
//! that path, so work can be split across threads without changing results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random stream used throughout the crate.
pub type SimRng = ChaCha8Rng;

/// Stream tags keep sub-streams for different purposes apart.
pub mod stream {
    pub const DEPLOY: u64 = 1;
    pub const OBSERVE: u64 = 2;
    pub const LOCALIZE: u64 = 3;
    pub const MOBILITY: u64 = 4;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `path` into `seed`, producing a new well-spread seed.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Stream seeded directly from `seed`.
pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Independent sub-stream for `path` under `seed`.
pub fn substream(seed: u64, path: &[u64]) -> SimRng {
    SimRng::seed_from_u64(derive_seed(seed, path))
}
