//! Seed derivation for per-database generators.
//!
//! Every database gets its own stream seed derived from
//! (global seed, db size, split, index), so adding a split or changing one
//! size never perturbs the bytes of any other database.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a base seed with a sequence of salts into a new stream seed.
pub fn derive_seed(base: u64, salts: &[u64]) -> u64 {
    let mut acc = splitmix64(base ^ 0x6a09_e667_f3bc_c908);
    for &s in salts {
        acc = splitmix64(acc ^ splitmix64(s));
    }
    acc
}

/// ChaCha8 keeps its output stable across platforms and crate versions,
/// which the byte-determinism guarantees rely on.
pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const SPLIT_TRAIN: u64 = 1;
pub const SPLIT_VALID: u64 = 2;
pub const SPLIT_TEST: u64 = 3;
