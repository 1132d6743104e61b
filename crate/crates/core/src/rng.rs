//! The one random generator used across the crate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator used by every simulation.
pub type SimRng = ChaCha8Rng;

/// Recorded in output metadata next to the master seed.
pub const GENERATOR_NAME: &str = "ChaCha8Rng(rand_chacha 0.9); seed_from_u64(master_seed), stream = substream index";

/// Independent substream `index` of the generator seeded with `master_seed`.
pub fn substream(master_seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Uniform index in `0..n`, sampled through `u64` so that 32- and 64-bit
/// targets consume the stream identically.
pub(crate) fn index<R: Rng + ?Sized>(rng: &mut R, n: usize) -> usize {
    debug_assert!(n > 0);
    rng.random_range(0..n as u64) as usize
}
