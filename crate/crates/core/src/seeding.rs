//! Seed derivation and the pinned random generator.
//!
//! Every random stream is a `ChaCha8Rng` seeded through
//! [`SeedableRng::seed_from_u64`]. Seeds for sub-streams are derived by
//! hashing a master seed with string labels (FNV-1a, then a SplitMix64
//! finalizer), so independent consumers never share a stream by accident.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic 64-bit seed from a master seed and a list of labels.
pub fn derive_seed(master: u64, labels: &[&str]) -> u64 {
    let mut h = FNV_OFFSET;
    let mut eat = |b: u8| {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    };
    master.to_le_bytes().into_iter().for_each(&mut eat);
    for label in labels {
        // Length prefix keeps ["ab", "c"] and ["a", "bc"] apart.
        (label.len() as u64).to_le_bytes().into_iter().for_each(&mut eat);
        label.bytes().for_each(&mut eat);
    }
    splitmix64(h)
}

pub fn stream(master: u64, labels: &[&str]) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(master, labels))
}
