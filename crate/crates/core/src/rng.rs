//! Named, splittable random streams.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] keyed by
//! `(master seed, stream name, task index)`. Work items own their stream, so
//! results do not depend on how tasks are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Derive the 64-bit key of a named sub-stream.
pub fn stream_key(master: u64, name: &str, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ fnv1a(name)).wrapping_add(splitmix64(index)))
}

/// Generator for task `index` of stream `name` under `master`.
pub fn stream(master: u64, name: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_key(master, name, 0));
    rng.set_stream(index);
    rng
}
