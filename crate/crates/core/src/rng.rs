//! Named random substreams derived from one root seed.
//!
//! Every consumer draws from its own stream, keyed by a purpose label and up
//! to two indices (node, tick, flow, ...). Adding a consumer never shifts the
//! numbers another consumer sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Purpose labels for substreams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Stream {
    Mobility = 1,
    Placement = 2,
    Traffic = 3,
    Mac = 4,
    Endpoints = 5,
    Reference = 6,
    Protocol = 7,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedTree {
    root: u64,
}

impl SeedTree {
    pub fn new(root: u64) -> Self {
        SeedTree { root }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    /// Deterministic generator for `(stream, a, b)`.
    pub fn stream(&self, stream: Stream, a: u64, b: u64) -> SimRng {
        let mut h = splitmix64(self.root);
        h = splitmix64(h ^ stream as u64);
        h = splitmix64(h ^ a);
        h = splitmix64(h ^ b.rotate_left(32));
        SimRng::seed_from_u64(h)
    }
}
