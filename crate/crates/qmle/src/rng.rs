//! Deterministic RNG streams for replicated experiments.
//!
//! Every replication draws from its own ChaCha8 stream: the generator is
//! seeded with the experiment's master seed and the stream id is set to the
//! replication index. Streams never overlap, so replications can run on any
//! number of worker threads and still produce bit-identical results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG used throughout the crate.
pub type Stream = ChaCha8Rng;

/// Derive the independent stream `stream_id` of `master_seed`.
pub fn stream(master_seed: u64, stream_id: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id);
    rng
}
