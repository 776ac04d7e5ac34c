//! Counter-based seed derivation. Every random stream is keyed by the master
//! seed plus a path of counters (run, epoch, batch, ...), so streams do not
//! depend on how many draws other streams consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream labels, used as the first counter so that e.g. run 0 of the
/// initialization stream never collides with run 0 of the sampling stream.
pub mod stream {
    pub const INIT: u64 = 1;
    pub const LATENT: u64 = 2;
    pub const SAMPLE: u64 = 3;
    pub const ESTIMATE: u64 = 4;
    pub const RUN: u64 = 5;
    pub const POINT: u64 = 6;
    pub const METROPOLIS: u64 = 7;
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Folds `counters` into `master` one at a time through SplitMix64.
pub fn derive_seed(master: u64, counters: &[u64]) -> u64 {
    counters.iter().fold(splitmix64(master), |acc, &c| splitmix64(acc ^ splitmix64(c)))
}

pub fn stream_rng(master: u64, counters: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(master, counters))
}
