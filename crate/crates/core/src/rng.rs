//! Named random streams derived from one seed.
//!
//! `stream(name)` hashes the root seed with the name, so a stage can be
//! re-run alone and still see the numbers it saw inside a full run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StageRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedSplitter {
    root: u64,
}

impl SeedSplitter {
    pub fn new(seed: u64) -> Self {
        Self { root: seed }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    fn digest(&self, name: &str) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.root.to_le_bytes());
        h.update((name.len() as u64).to_le_bytes());
        h.update(name.as_bytes());
        h.finalize().into()
    }

    pub fn stream(&self, name: &str) -> StageRng {
        ChaCha8Rng::from_seed(self.digest(name))
    }

    /// A splitter rooted at a derived seed, for per-day or per-message
    /// substreams.
    pub fn child(&self, name: &str) -> SeedSplitter {
        let d = self.digest(name);
        SeedSplitter::new(u64::from_le_bytes(d[..8].try_into().unwrap()))
    }
}
