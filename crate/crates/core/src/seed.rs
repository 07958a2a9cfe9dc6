//! Seeded randomness helpers. Every random choice in the crate flows from an
//! explicit `u64` seed through ChaCha8, so outputs are reproducible across
//! platforms and thread counts.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent child seed from a base seed and a text tag
/// (FNV-1a over the tag, mixed with splitmix64).
pub fn derive(base: u64, tag: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix(base ^ h)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fisher–Yates permutation of `rows`, fully determined by `seed`.
pub fn shuffle_rows<T>(mut rows: Vec<T>, seed: u64) -> Vec<T> {
    rows.shuffle(&mut rng(seed));
    rows
}
