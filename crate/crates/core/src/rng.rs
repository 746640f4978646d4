//! Deterministic random streams: one 64-bit seed, one ChaCha stream per
//! consumer.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STREAM_POTENTIAL: u64 = 1;
pub const STREAM_PHASE_POINTS: u64 = 2;
pub const STREAM_RESONANCE: u64 = 3;
pub const STREAM_FIXTURES: u64 = 4;

pub fn stream(seed: u64, consumer: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(consumer);
    rng
}

/// Independent sub-stream for the `index`-th work item of a consumer, so that
/// parallel chunks draw the same numbers regardless of scheduling.
pub fn substream(seed: u64, consumer: u64, index: u64) -> ChaCha8Rng {
    let mut rng = stream(seed, consumer);
    rng.set_word_pos((index as u128) << 36);
    rng
}
