//! Seeded random number generation.
//!
//! Every random draw in the crate comes from ChaCha8 (`rand_chacha`), a
//! counter-based stream cipher generator. A run is identified by a 64-bit
//! seed, expanded to a 256-bit key with `SeedableRng::seed_from_u64`;
//! independent streams (one per trajectory, one per generator purpose) are
//! selected with ChaCha's 64-bit stream id. Output is therefore reproducible
//! across platforms and thread schedules.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream ids at or above this are reserved for non-trajectory purposes.
const RESERVED: u64 = 1 << 63;
pub(crate) const BOTTLENECK_STREAM: u64 = RESERVED + 1;
pub(crate) const GENERATOR_STREAM: u64 = RESERVED + 2;

/// Generator for stream `stream` of run `seed`.
pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generator for trajectory `index` of run `seed`.
pub fn trajectory(seed: u64, index: u64) -> Rng {
    debug_assert!(index < RESERVED);
    stream(seed, index)
}
