//! Deterministic seed derivation.
//!
//! Every pseudo-random draw in the crate flows through a seed derived from
//! (global seed, task kind, index) by a counter-based mix, so results are
//! independent of worker count and scheduling order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xCBF2_9CE4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x1000_0000_01B3);
    }
    h
}

/// Derive a child seed from a global seed, a task-kind label, and an index.
pub fn derive_seed(global: u64, kind: &str, index: u64) -> u64 {
    let mut s = splitmix64(global ^ fnv1a64(kind.as_bytes()));
    s = splitmix64(s ^ index);
    s
}

/// Seeded RNG for a derived task. ChaCha8 output is stable across platforms.
pub fn task_rng(global: u64, kind: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(global, kind, index))
}
