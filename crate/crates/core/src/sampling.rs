//! Seeded random streams and fiber draws.
//!
//! A Monte Carlo run of `N` samples is cut into fixed blocks of
//! [`BLOCK_SIZE`] consecutive sample indices. Block `b` draws from a
//! ChaCha8 generator keyed by the run seed (expanded with
//! `SeedableRng::seed_from_u64`) and positioned on stream `b`
//! (`set_stream(b)`). ChaCha streams with distinct ids never overlap, so
//! blocks can be evaluated by any number of workers in any order and the
//! per-sample values are always the same.

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Samples per random stream.
pub const BLOCK_SIZE: usize = 4096;

/// Generator for block `block` of a run seeded with `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Number of blocks covering `samples` indices.
pub fn block_count(samples: usize) -> usize {
    samples.div_ceil(BLOCK_SIZE)
}

/// Uniform point on the unit sphere of `C^dim`: a standard complex
/// Gaussian vector, normalized.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// One unit vector per requested dimension.
pub fn fiber_draws<R: Rng + ?Sized>(rng: &mut R, dims: &[usize]) -> Vec<Vec<Complex64>> {
    dims.iter().map(|&d| unit_vector(rng, d)).collect()
}

/// Picks base-sample indices proportionally to their weights.
#[derive(Debug, Clone)]
pub struct BasePicker {
    dist: Option<WeightedIndex<f64>>,
}

impl BasePicker {
    pub fn new(weights: &[f64]) -> Result<Self> {
        match weights.len() {
            0 => Err(Error::InvalidScenario("samples: scenario has no base samples".into())),
            // a single sample consumes no randomness
            1 => Ok(BasePicker { dist: None }),
            _ => WeightedIndex::new(weights)
                .map(|d| BasePicker { dist: Some(d) })
                .map_err(|e| Error::InvalidScenario(format!("weights: {e}"))),
        }
    }

    pub fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match &self.dist {
            None => 0,
            Some(d) => d.sample(rng),
        }
    }
}
