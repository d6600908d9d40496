//! Seeded random streams.
//!
//! One master seed per run fans out into independent ChaCha streams, one per
//! consumer. Stream ids are fixed so adding a consumer (for example more
//! evaluation points) never perturbs another consumer's draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RunRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Init = 0,
    Env = 1,
    Explore = 2,
    Replay = 3,
    Eval = 4,
    Theory = 5,
}

/// Independent stream `stream` of the master seed.
pub fn stream(master_seed: u64, stream: Stream) -> RunRng {
    sub_stream(master_seed, stream as u64)
}

/// Raw stream id, for callers that need many streams (one per grid cell).
pub fn sub_stream(master_seed: u64, id: u64) -> RunRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(id);
    rng
}
