//! Seeded random streams.
//!
//! Every random quantity is drawn from ChaCha20 (`rand_chacha` 0.9) seeded
//! with `ChaCha20Rng::seed_from_u64(seed)`. Independent consumers use
//! disjoint ChaCha stream ids on the same key, so the sample-set draw and the
//! noise draw for a given seed never share keystream:
//!
//! | stream id | consumer                         |
//! |-----------|----------------------------------|
//! | 1         | sample-location generators       |
//! | 2         | multiplicative observation noise |
//!
//! Uniform reals use `rand`'s 53-bit `StandardUniform` for `f64`; Gaussian
//! draws use `rand_distr::StandardNormal` (ziggurat). Changing either crate's
//! major version may change the streams.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub const GENERATOR_NAME: &str = "chacha20/rand_chacha-0.9";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Samples,
    Noise,
}

impl Stream {
    pub const fn id(self) -> u64 {
        match self {
            Stream::Samples => 1,
            Stream::Noise => 2,
        }
    }
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}
