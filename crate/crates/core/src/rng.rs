//! Seeded, splittable random streams.
//!
//! Every random quantity in the crate is drawn from a [`RngSpec`], a
//! `(seed, stream_id)` pair that maps onto one ChaCha8 stream. Parallel
//! work derives child specs with [`RngSpec::child`], so the draws a
//! replication sees depend only on its index and never on which worker
//! happened to run it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngSpec {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream_id: 0 }
    }

    pub fn with_stream(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Builds the generator for this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Derives an independent substream, e.g. one per replication or per
    /// purpose within a replication.
    pub fn child(&self, index: u64) -> Self {
        let mixed = splitmix64(splitmix64(self.stream_id) ^ splitmix64(index.wrapping_add(0x5851_f42d)));
        Self { seed: self.seed, stream_id: mixed }
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
