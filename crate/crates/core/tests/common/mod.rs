#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seqalloc::prob::{moment_match, DemandModel, MarginalLogNormal};
use seqalloc::Instance;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random symmetric positive definite matrix `A Aᵀ + shift·I`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(n, n) * shift
}

pub fn random_marginal(rng: &mut ChaCha8Rng) -> MarginalLogNormal {
    moment_match(rng.random_range(20.0..100.0), rng.random_range(10.0..30.0)).unwrap()
}

/// Independent log-normal instance with prices in [10, 100].
pub fn random_independent_instance(rng: &mut ChaCha8Rng, t: usize) -> Instance {
    let marginals: Vec<_> = (0..t).map(|_| random_marginal(rng)).collect();
    let prices: Vec<f64> = (0..t).map(|_| rng.random_range(10.0..100.0)).collect();
    let total: f64 = marginals.iter().map(|m| m.mean()).sum();
    let limit = rng.random_range(0.1..1.2) * total;
    Instance::new(prices, limit, DemandModel::independent(&marginals).unwrap()).unwrap()
}

/// Correlated instance with a random SPD log covariance.
pub fn random_correlated_instance(rng: &mut ChaCha8Rng, t: usize) -> Instance {
    let sigma = random_spd(rng, t, 0.05) * 0.1;
    let mu = DVector::from_fn(t, |_, _| rng.random_range(2.5..4.5));
    let model = DemandModel::new(mu, sigma).unwrap();
    let prices: Vec<f64> = (0..t).map(|_| rng.random_range(10.0..100.0)).collect();
    let total: f64 = model.marginals().unwrap().iter().map(|m| m.mean()).sum();
    let limit = rng.random_range(0.3..0.6) * total;
    Instance::new(prices, limit, model).unwrap()
}

/// Positive demand path with log-uniform entries.
pub fn random_path(rng: &mut ChaCha8Rng, t: usize) -> Vec<f64> {
    (0..t)
        .map(|_| rng.random_range(1.0f64..5.0).exp())
        .collect()
}

/// Composite Simpson rule on [lo, hi] with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(lo + i as f64 * h);
    }
    s * h / 3.0
}

/// Dense partitioned-Gaussian conditioning with explicit inversion of Σ_OO.
pub fn brute_force_condition(
    mu: &DVector<f64>,
    sigma: &DMatrix<f64>,
    observed: &[(usize, f64)],
) -> (DVector<f64>, DMatrix<f64>) {
    let n = mu.len();
    let obs: Vec<usize> = observed.iter().map(|o| o.0).collect();
    let rem: Vec<usize> = (0..n).filter(|i| !obs.contains(i)).collect();
    let mut s_oo = DMatrix::zeros(obs.len(), obs.len());
    let mut s_ro = DMatrix::zeros(rem.len(), obs.len());
    let mut s_rr = DMatrix::zeros(rem.len(), rem.len());
    for (a, &i) in obs.iter().enumerate() {
        for (b, &j) in obs.iter().enumerate() {
            s_oo[(a, b)] = sigma[(i, j)];
        }
    }
    for (a, &i) in rem.iter().enumerate() {
        for (b, &j) in obs.iter().enumerate() {
            s_ro[(a, b)] = sigma[(i, j)];
        }
        for (b, &j) in rem.iter().enumerate() {
            s_rr[(a, b)] = sigma[(i, j)];
        }
    }
    let inv = s_oo.try_inverse().expect("test matrices are nonsingular");
    let dev = DVector::from_iterator(obs.len(), observed.iter().map(|&(i, x)| x.ln() - mu[i]));
    let mu_r = DVector::from_iterator(rem.len(), rem.iter().map(|&i| mu[i]));
    let gain = &s_ro * inv;
    (mu_r + &gain * dev, s_rr - gain * s_ro.transpose())
}
