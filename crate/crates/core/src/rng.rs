//! Seeded random streams.
//!
//! Every stochastic step (holdout sampling, fold assignment, model
//! initialisation, synthetic data) draws from its own ChaCha stream so that
//! adding a consumer never shifts the numbers seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STREAM_HOLDOUT: u64 = 1;
pub const STREAM_FOLDS: u64 = 2;
pub const STREAM_INIT: u64 = 3;
pub const STREAM_SYNTH: u64 = 4;

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
