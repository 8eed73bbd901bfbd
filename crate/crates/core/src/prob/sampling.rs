use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::gaussian::DemandModel;
use super::linalg::jittered_cholesky;
use crate::error::{Error, Result};

/// Draws demand paths `exp(mu + L z)` with `L Lᵀ ≈ sigma`.
///
/// The factor is computed once; each path costs O(T²).
#[derive(Debug, Clone)]
pub struct PathSampler {
    mu: DVector<f64>,
    factor: DMatrix<f64>,
}

impl PathSampler {
    pub fn new(model: &DemandModel) -> Result<Self> {
        let sigma = model.sigma();
        let factor = if sigma.iter().all(|&v| v == 0.0) {
            sigma.clone()
        } else {
            jittered_cholesky(sigma)?.0.unpack()
        };
        Ok(Self {
            mu: model.mu().clone(),
            factor,
        })
    }

    pub fn horizon(&self) -> usize {
        self.mu.len()
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let t = self.horizon();
        let z: Vec<f64> = (0..t).map(|_| StandardNormal.sample(rng)).collect();
        (0..t)
            .map(|i| {
                let shift: f64 = (0..=i).map(|j| self.factor[(i, j)] * z[j]).sum();
                (self.mu[i] + shift).exp()
            })
            .collect()
    }

    /// Path number `index` of the stream keyed by `seed`.
    pub fn sample_indexed(&self, seed: u64, index: u64) -> Vec<f64> {
        self.sample(&mut path_rng(seed, index))
    }
}

/// RNG for path `index` under master `seed`: ChaCha8 keyed by the seed,
/// with the path index as the stream id. Streams are independent, so any
/// subset of paths can be drawn in any order or on any thread.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `n` demand paths, one per row.
pub fn sample_paths(model: &DemandModel, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::domain(
            "sample_paths",
            "path count must be at least 1",
        ));
    }
    let sampler = PathSampler::new(model)?;
    Ok((0..n as u64)
        .map(|i| sampler.sample_indexed(seed, i))
        .collect())
}
