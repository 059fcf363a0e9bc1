//! Seeded, splittable random streams.
//!
//! A [`RandomSource`] is a `(seed, stream)` pair naming a ChaCha8 keystream.
//! ChaCha output is specified bit-for-bit, so the same pair yields the same
//! draws on every platform. Sub-streams are derived by hashing a label into
//! the stream id, which lets every replication and every dataset within it
//! draw independently of worker scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomSource {
    pub seed: u64,
    pub stream: u64,
}

// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Derives an independent child stream identified by `label`.
    pub fn fork(&self, label: u64) -> Self {
        Self {
            seed: self.seed,
            stream: mix(self.stream ^ mix(label)),
        }
    }

    /// Child stream for a named purpose, e.g. `"p-data"`.
    pub fn fork_named(&self, name: &str) -> Self {
        // FNV-1a; stable across platforms and releases.
        let h = name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
        });
        self.fork(h)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}
