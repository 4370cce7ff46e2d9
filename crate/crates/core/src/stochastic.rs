//! Seedable random streams.
//!
//! Every run owns one [`RandomStream`], identified by `(seed, substream_id)`.
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng`): the 64-bit seed is
//! expanded into the 256-bit key with `SeedableRng::seed_from_u64` and the
//! substream id selects the ChaCha stream (nonce), so streams sharing a seed
//! but differing in substream never overlap. Gaussians use the ziggurat
//! sampler of `rand_distr::StandardNormal`; uniforms are `a + (b - a) * u`
//! with `u` the 53-bit `[0, 1)` float from `Rng::random::<f64>()`.
//!
//! Within one market timestep draws are consumed in this order:
//!
//! 1. the information shock `eta`;
//! 2. threshold noise per agent in index order, lower before upper;
//! 3. reset draws `Z_L` then `Z_U` for each switching agent, batch by batch,
//!    ascending agent index within a batch;
//! 4. re-centering draws (`Z_L`, `Z_U`) for agents that already switched this
//!    step but were left outside their interval by a later batch.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Source of the Gaussian and uniform variates consumed by the market model.
///
/// [`RandomStream`] is the production implementation; tests plug in scripted
/// sources to replay hand-chosen draws.
pub trait Draws {
    fn gaussian(&mut self) -> f64;

    fn unit(&mut self) -> f64;

    fn uniform(&mut self, a: f64, b: f64) -> Result<f64> {
        check_range(a, b)?;
        Ok(a + (b - a) * self.unit())
    }
}

pub(crate) fn check_range(a: f64, b: f64) -> Result<()> {
    if !(a <= b) {
        return Err(Error::InvalidRange { lo: a, hi: b });
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    substream_id: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, substream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(substream_id);
        Self {
            seed,
            substream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn substream_id(&self) -> u64 {
        self.substream_id
    }

    pub fn gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform(&mut self, a: f64, b: f64) -> Result<f64> {
        Draws::uniform(self, a, b)
    }
}

impl Draws for RandomStream {
    #[inline]
    fn gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    #[inline]
    fn unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}
