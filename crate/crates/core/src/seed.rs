//! Seed derivation. Every random stream in the crate is a `ChaCha8Rng`
//! seeded from a `u64`, so results never depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent sub-seed for a named stream (e.g. a method label).
pub fn derive(seed: u64, stream: &str) -> u64 {
    // FNV-1a over the tag, then mixed with the parent seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in stream.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    splitmix64(seed ^ splitmix64(h))
}

/// Independent sub-seed for the `index`-th member of a stream.
pub fn derive_indexed(seed: u64, stream: &str, index: u64) -> u64 {
    splitmix64(derive(seed, stream) ^ splitmix64(index))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_streams_differ() {
        assert_ne!(derive(1, "split"), derive(1, "svm"));
        assert_ne!(derive(1, "svm"), derive(2, "svm"));
        assert_eq!(derive(9, "ecoc"), derive(9, "ecoc"));
        assert_ne!(derive_indexed(3, "x", 0), derive_indexed(3, "x", 1));
    }
}
