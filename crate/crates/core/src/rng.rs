use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Descriptor of an independent random stream.
///
/// Two descriptors with the same `(master_seed, stream_index)` always produce
/// the same sequence, no matter how many other streams exist or in which order
/// they are consumed. Parallel workers derive disjoint streams by index.
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

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// Stream `offset` positions further along the index space.
    pub fn offset(&self, offset: u64) -> Self {
        Self::new(self.master_seed, self.stream_index.wrapping_add(offset))
    }
}
