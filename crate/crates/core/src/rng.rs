//! Seeded randomness.
//!
//! Every stochastic routine draws from [`SeededRng`] (ChaCha8), which is
//! portable across platforms and pointer widths, so a seed reproduces the
//! same stream everywhere.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent seed from a master seed and a list of labels.
///
/// The labels are length-prefixed before hashing so that `("ab", "c")` and
/// `("a", "bc")` give different seeds.
pub fn derive_seed(master: u64, labels: &[&str], index: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    for label in labels {
        hasher.update((label.len() as u64).to_le_bytes());
        hasher.update(label.as_bytes());
    }
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}
