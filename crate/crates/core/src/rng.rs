//! Seeded random streams.
//!
//! Every random object is drawn from ChaCha8 (`rand_chacha` 0.3) seeded with
//! `seed_from_u64(seed)` and switched to a stream id that names the object
//! (permutation index, trial index, ...). Streams never overlap, so results do
//! not depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const PRNG_NAME: &str = "chacha8/rand_chacha-0.3/seed_from_u64+set_stream";

pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child seed from a parent seed and a label path.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    use rand::RngCore;
    let mut key = seed;
    for &p in path {
        key = substream(key, p).next_u64();
    }
    key
}
