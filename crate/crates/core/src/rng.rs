//! Counter-keyed random streams.
//!
//! Every random draw in a chain comes from a stream addressed by
//! `(master seed, iteration, purpose, environment key, row, ...)`. Streams
//! never depend on how work is split across threads, so a chain is
//! bit-reproducible under any thread layout and can be resumed from nothing
//! more than its iteration counter.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ChainRng = ChaCha8Rng;

/// Purpose tags separating the streams of different sampler steps.
pub mod purpose {
    pub const THETA: u64 = 1;
    pub const LATENT_Z: u64 = 2;
    pub const OMEGA: u64 = 3;
    pub const BIRTH_DEATH: u64 = 4;
    pub const INIT: u64 = 5;
    pub const MARGINAL: u64 = 6;
    pub const SIM_THETA: u64 = 7;
    pub const SIM_GRAPHS: u64 = 8;
    pub const SIM_OMEGA: u64 = 9;
    pub const SIM_DATA: u64 = 10;
}

#[inline]
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// A hierarchical stream address.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    state: u64,
}

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        StreamKey { state: splitmix64(seed ^ 0x005E_ED0F_C4A1_u64) }
    }

    pub fn child(self, part: u64) -> Self {
        StreamKey { state: splitmix64(self.state ^ splitmix64(part.wrapping_add(0xA5A5_A5A5))) }
    }

    pub fn rng(self) -> ChainRng {
        let mut seed = [0u8; 32];
        let mut s = self.state;
        for chunk in seed.chunks_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }
}

/// FNV-1a hash of an environment label. Keying streams by label rather than
/// position keeps an environment's streams unchanged when others are added
/// or removed.
pub fn label_key(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}
