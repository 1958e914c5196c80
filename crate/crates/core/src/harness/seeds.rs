//! Named random sub-streams derived from one root seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const ORDERING: &str = "ordering";
pub const HASH: &str = "hash";
pub const RESIDUES: &str = "residues";
pub const GENERATOR: &str = "generator";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedStreams {
    root: u64,
}

impl SeedStreams {
    pub fn new(root: u64) -> Self {
        SeedStreams { root }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    /// A 64-bit seed for the sub-stream `name`.
    pub fn seed(&self, name: &str) -> u64 {
        // FNV-1a over the name, then mixed with the root
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in name.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        mix(self.root ^ mix(h))
    }

    pub fn rng(&self, name: &str) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed(name))
    }
}

fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}
