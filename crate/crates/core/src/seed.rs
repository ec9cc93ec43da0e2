//! Stable seed derivation.
//!
//! Seeds for a run are derived by hashing grid coordinates by value, so adding
//! points to a sweep never changes the randomness of existing cells.

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Combines a seed with one more word.
pub fn mix(seed: u64, word: u64) -> u64 {
    splitmix64(seed ^ splitmix64(word))
}

/// Folds a sequence of words into `seed`, order-sensitively.
pub fn mix_all(seed: u64, words: impl IntoIterator<Item = u64>) -> u64 {
    words.into_iter().fold(seed, mix)
}

/// Stable 64-bit hash of a string label (FNV-1a).
pub fn label_hash(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}
