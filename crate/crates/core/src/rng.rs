//! Seeded random streams.
//!
//! Every stochastic routine draws from ChaCha8 keyed by the user seed, with
//! the ChaCha stream id selecting an independent sub-sequence. Work split
//! across threads uses one stream per fixed-size chunk, so results do not
//! depend on the number of workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
