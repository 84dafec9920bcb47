//! Per-path random streams.
//!
//! Every sample path draws from its own ChaCha8 stream: the key is derived
//! from the run seed and the stream id is the path index. Paths therefore do
//! not depend on how many others were simulated, or in which order, or on
//! how many threads did the work.
//!
//! Normal variates come from `rand_distr::StandardNormal` (ziggurat), pinned
//! by the `rand_distr` version in the lockfile.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Independent stream for path `index` under `seed`.
pub fn path_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[inline]
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}
