//! Seeded randomness with deterministic per-task substreams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(state: u64, bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(state, |h, b| (h ^ u64::from(*b)).wrapping_mul(FNV_PRIME))
}

/// Generator for the task identified by `keys` under the run seed `seed`.
///
/// The stream depends only on `(seed, keys)`, so a task sees the same samples
/// whether it runs alone or as part of a larger batch.
pub fn substream(seed: u64, keys: &[&str]) -> ChaCha8Rng {
    let mut h = fnv1a(FNV_OFFSET, &seed.to_le_bytes());
    for k in keys {
        h = fnv1a(h, k.as_bytes());
        h = fnv1a(h, &[0xff]);
    }
    ChaCha8Rng::seed_from_u64(h)
}
