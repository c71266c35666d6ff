//! Seeded random streams. Every random choice in the library flows from a
//! single `u64` seed through ChaCha8.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator identity recorded in output headers.
pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.9)";

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the generator seeded by `seed`; used to
/// partition work by index so results do not depend on scheduling.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
