//! Named, seeded random streams.
//!
//! A stream is keyed by `SHA-256(seed || name)` and every trial draws from
//! its own ChaCha20 sub-stream selected by the trial index, so a draw is a
//! pure function of `(seed, name, index)`. Two distinct names never share
//! key material.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub const SETTINGS_STREAM: &str = "settings";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamFactory {
    key: [u8; 32],
}

impl StreamFactory {
    pub fn new(seed: u64, name: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(seed.to_le_bytes());
        hasher.update((name.len() as u64).to_le_bytes());
        hasher.update(name.as_bytes());
        Self { key: hasher.finalize().into() }
    }

    /// Generator for trial `index`.
    pub fn stream(&self, index: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::from_seed(self.key);
        rng.set_stream(index);
        rng
    }

    /// Derived factory for a labelled sub-component.
    pub fn child(&self, name: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(self.key);
        hasher.update(name.as_bytes());
        Self { key: hasher.finalize().into() }
    }
}

/// Draws an index from cumulative weights with a single uniform.
pub fn sample_index<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last_positive = i;
            if u < w {
                return i;
            }
            u -= w;
        }
    }
    last_positive
}
