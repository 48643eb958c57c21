//! Named random substreams derived from one root seed.
//!
//! Each consumer gets its own ChaCha stream, so adding draws in one place
//! (say, more exploration noise) never shifts another (mission sampling).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Init = 1,
    Endpoints = 2,
    Mobility = 3,
    Exploration = 4,
    Sampling = 5,
    Policy = 6,
}

pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(which as u64);
    r
}

/// All substreams of one run.
#[derive(Debug, Clone)]
pub struct Streams {
    pub init: ChaCha8Rng,
    pub endpoints: ChaCha8Rng,
    pub mobility: ChaCha8Rng,
    pub exploration: ChaCha8Rng,
    pub sampling: ChaCha8Rng,
    pub policy: ChaCha8Rng,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Self {
            init: stream(seed, Stream::Init),
            endpoints: stream(seed, Stream::Endpoints),
            mobility: stream(seed, Stream::Mobility),
            exploration: stream(seed, Stream::Exploration),
            sampling: stream(seed, Stream::Sampling),
            policy: stream(seed, Stream::Policy),
        }
    }
}

/// Seed of repeat `k` (0-based). Repeat 0 uses the root seed itself.
pub fn repeat_seed(root: u64, k: u64) -> u64 {
    if k == 0 {
        return root;
    }
    // splitmix64 finalizer
    let mut z = root.wrapping_add(k.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
