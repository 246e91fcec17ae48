//! Reproducible random streams.
//!
//! Every Monte Carlo sample draws from its own ChaCha8 stream, addressed by
//! `(master_seed, stream_index)`. The key is derived from the master seed and
//! the stream index selects an independent 2^64-block keystream, so sample `j`
//! sees the same numbers regardless of which worker runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// Generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// Stream with the same master seed and a different index.
    pub fn substream(&self, stream_index: u64) -> Self {
        Self::new(self.master_seed, stream_index)
    }
}
