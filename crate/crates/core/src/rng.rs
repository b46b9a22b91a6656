//! Splittable seeded randomness.
//!
//! A [`SeedStream`] is a 64-bit seed plus a label path. Each path maps through
//! SHA-256 to an independent ChaCha20 key, so substreams do not depend on the
//! order in which they are drawn.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedStream {
    seed: u64,
    path: String,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, path: String::new() }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> &str {
        &self.path
    }

    /// Substream named `label` beneath this one, e.g. `"hadamard/term=3"`.
    pub fn child(&self, label: impl AsRef<str>) -> Self {
        let path =
            if self.path.is_empty() { label.as_ref().to_string() } else { format!("{}/{}", self.path, label.as_ref()) };
        Self { seed: self.seed, path }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(self.path.as_bytes());
        let digest = h.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        ChaCha20Rng::from_seed(key)
    }

    pub fn child_rng(&self, label: impl AsRef<str>) -> ChaCha20Rng {
        self.child(label).rng()
    }
}
