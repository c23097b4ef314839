//! Seed derivation. Every stochastic choice in a match draws from a ChaCha8
//! stream derived from the match seed, so results replay exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type GameRng = ChaCha8Rng;

/// SplitMix64 finalizer over two words.
pub fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.rotate_left(32) ^ 0x9E37_79B9_7F4A_7C15;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one seed.
pub fn mix_all(seed: u64, words: impl IntoIterator<Item = u64>) -> u64 {
    words.into_iter().fold(mix(seed, 0), mix)
}

pub fn rng_from(seed: u64) -> GameRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of `seed`.
pub fn derive_rng(seed: u64, stream: u64) -> GameRng {
    ChaCha8Rng::seed_from_u64(mix(seed, stream))
}
