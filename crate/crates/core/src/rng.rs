//! Deterministic seed splitting.
//!
//! Every stochastic routine derives its generator from `(seed, stream)`, where
//! the stream is a fixed logical index (a replicate block, a cell, ...). The
//! mapping never depends on thread scheduling, so parallel runs reproduce the
//! sequential ones bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream offsets that keep different consumers of one seed apart.
pub(crate) mod streams {
    pub const CHAOS_GAME: u64 = 0x0100_0000;
    pub const STRATIFIED: u64 = 0x0200_0000;
    pub const FIELD_BLOCKS: u64 = 0x1000_0000;
}

/// Generator for logical stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
