//! Reproducible random streams keyed by `(master_seed, stream_id)`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A ChaCha stream selected by a master seed and a stream id.
///
/// Streams with different ids are independent, so parallel trials can each
/// own one without coordination. Identical keys reproduce identical output.
#[derive(Debug, Clone)]
pub struct StreamRng {
    master_seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl StreamRng {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_id);
        Self {
            master_seed,
            stream_id,
            inner,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Derives an independent child stream, e.g. for one phase of a trial.
    pub fn fork(&mut self, label: u64) -> StreamRng {
        StreamRng::new(splitmix64(self.inner.next_u64() ^ label), label)
    }
}

impl RngCore for StreamRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// SplitMix64 finalizer, used to derive well-spread seeds from small integers.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
