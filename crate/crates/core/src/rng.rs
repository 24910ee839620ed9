//! Reproducible random streams.
//!
//! Every experiment is driven by a single 64-bit master seed. Independent
//! trials draw from child streams obtained by counter-mode splitting: the
//! ChaCha key is derived from the master seed and the 64-bit stream counter
//! is the trial index. Child streams never overlap, and a given
//! `(seed, stream)` pair yields the same sequence regardless of how many
//! worker threads are in use.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// RNG type used throughout the crate.
pub type Rng = ChaCha12Rng;

/// Root stream for a given master seed.
pub fn master(seed: u64) -> Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Child stream `stream` of the given master seed.
pub fn child(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
