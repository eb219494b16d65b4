//! Counter-based random streams.
//!
//! Every stochastic component draws from a ChaCha8 generator addressed by a
//! `(seed, stream)` pair. Streams are independent keystreams of the same key,
//! so a Monte-Carlo chunk or a training run can be reproduced in isolation,
//! regardless of which worker thread executes it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Generator for stream `stream` under `seed`.
pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Folds a tuple of indices into a single stream id.
///
/// Used to give e.g. `(point, chunk)` pairs distinct streams. The mixing is a
/// splitmix64 finalizer, so nearby tuples land far apart.
pub fn stream_id(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x9E37_79B9_7F4A_7C15;
    for &p in parts {
        h ^= p.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(h << 6).wrapping_add(h >> 2);
        h = splitmix(h);
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
