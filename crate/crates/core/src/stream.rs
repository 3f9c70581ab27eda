//! Per-individual random streams.
//!
//! Individual `i` of a run with master seed `s` always draws from ChaCha8
//! seeded with `s` on stream `i`, so a population is reproducible no matter
//! how the individuals are scheduled across threads.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Source of the draws one simulated individual consumes.
pub trait RandomStream {
    fn standard_normal(&mut self) -> f64;
    /// Uniform on the open interval (0, 1).
    fn open_uniform(&mut self) -> f64;
}

#[derive(Debug, Clone)]
pub struct IndividualStream {
    rng: ChaCha8Rng,
}

impl IndividualStream {
    pub fn new(master_seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(index);
        IndividualStream { rng }
    }
}

impl RandomStream for IndividualStream {
    fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    fn open_uniform(&mut self) -> f64 {
        self.rng.sample(Open01)
    }
}
