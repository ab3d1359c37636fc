use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Seed, sample count and sampling radius for a randomized check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub seed: u64,
    pub count: usize,
    pub radius: f64,
}

impl SampleSpec {
    pub fn new(seed: u64, count: usize, radius: f64) -> Result<Self, GeometryError> {
        if count == 0 {
            return Err(GeometryError::InvalidInput("sample count must be >= 1".into()));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(GeometryError::InvalidInput(format!("sampling radius {radius} must be positive")));
        }
        Ok(Self { seed, count, radius })
    }

    /// Sampler for one named check. Different checks get independent streams
    /// so that their reports do not depend on execution order.
    pub fn sampler(&self, stream: &str) -> Sampler {
        Sampler::new(self.seed, stream)
    }
}

/// Deterministic ChaCha8 stream.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64, stream: &str) -> Self {
        // FNV-1a of the stream name selects the ChaCha stream.
        let tag = stream
            .bytes()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(tag);
        Self { rng }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..=hi)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    /// Combination parameter in [0, 1], with the endpoints drawn exactly now and then.
    pub fn unit(&mut self) -> f64 {
        match self.rng.gen_range(0..40) {
            0 => 0.0,
            1 => 1.0,
            _ => self.rng.gen_range(0.0..=1.0),
        }
    }
}
