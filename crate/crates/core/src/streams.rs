//! Deterministic seed derivation.
//!
//! Every random stream in an experiment is a ChaCha8 generator seeded from a
//! stable hash of `(master_seed, trial, tag)`, so a trial can be replayed from
//! those three values alone and no two trials share a stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finaliser. Bijective on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a sequence of words into one.
#[inline]
pub fn hash_words(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x243F_6A88_85A3_08D3, |acc, &w| mix64(acc ^ mix64(w)))
}

/// Maps a hash to a uniform value in the open interval `(0, 1)`.
#[inline]
pub fn open_unit(h: u64) -> f64 {
    ((h >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Independent random streams used inside one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamTag {
    Points,
    Weights,
}

impl StreamTag {
    fn word(self) -> u64 {
        match self {
            StreamTag::Points => 0x706F_696E_7473,
            StreamTag::Weights => 0x7765_6967_6874,
        }
    }
}

pub fn stream_seed(master_seed: u64, trial: u64, tag: StreamTag) -> u64 {
    hash_words(&[master_seed, trial, tag.word()])
}

pub fn trial_rng(master_seed: u64, trial: u64, tag: StreamTag) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master_seed, trial, tag))
}
