//! Counter-based random streams: every stream is a pure function of
//! `(seed, domain, index)`, so results do not depend on iteration order or
//! thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a sequence of words into a single 64-bit key.
pub fn mix(words: &[u64]) -> u64 {
    words.iter().fold(0x6a09_e667_f3bc_c908, |acc, &w| splitmix64(acc ^ splitmix64(w)))
}

/// Independent generator for `(seed, domain, index...)`.
pub fn stream(seed: u64, domain: u64, index: &[u64]) -> ChaCha8Rng {
    let mut words = Vec::with_capacity(index.len() + 2);
    words.push(seed);
    words.push(domain);
    words.extend_from_slice(index);
    ChaCha8Rng::seed_from_u64(mix(&words))
}

/// Domain tags, one per kind of randomness.
pub mod domain {
    pub const SITE_POTENTIAL: u64 = 1;
    pub const SAMPLER_BLOCK: u64 = 2;
    pub const TEST_INSTANCE: u64 = 3;
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: f64 = stream(7, 1, &[3, 4]).random();
        let b: f64 = stream(7, 1, &[3, 4]).random();
        let c: f64 = stream(7, 1, &[4, 3]).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
