use serde::{Deserialize, Serialize};

use super::normal::{std_normal_cdf, std_normal_sf, upper_quantile_unchecked};
use crate::error::{Error, Result};

/// Marginal law of one period's demand: `ln d ~ N(log_mean, log_std²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalLogNormal {
    log_mean: f64,
    log_std: f64,
}

impl MarginalLogNormal {
    pub fn new(log_mean: f64, log_std: f64) -> Result<Self> {
        if !log_mean.is_finite() {
            return Err(Error::invalid(
                "log_mean",
                format!("must be finite, got {log_mean}"),
            ));
        }
        if !(log_std > 0.0 && log_std.is_finite()) {
            return Err(Error::invalid(
                "log_std",
                format!("must be positive and finite, got {log_std}"),
            ));
        }
        Ok(Self { log_mean, log_std })
    }

    pub fn log_mean(&self) -> f64 {
        self.log_mean
    }

    pub fn log_std(&self) -> f64 {
        self.log_std
    }

    /// E[d] = exp(μ + σ²/2).
    pub fn mean(&self) -> f64 {
        (self.log_mean + 0.5 * self.log_std * self.log_std).exp()
    }

    pub fn std_dev(&self) -> f64 {
        let s2 = self.log_std * self.log_std;
        self.mean() * s2.exp_m1().sqrt()
    }

    /// P(d ≤ x).
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        std_normal_cdf((x.ln() - self.log_mean) / self.log_std)
    }

    /// P(d > x). Continuous, so equal to P(d ≥ x).
    pub fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        std_normal_sf((x.ln() - self.log_mean) / self.log_std)
    }

    /// F⁻¹(y) for y in [0, 1); F⁻¹(0) = 0 (infimum of the support).
    pub fn quantile(&self, y: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&y) {
            return Err(Error::domain(
                "lognormal_quantile",
                format!("level must lie in [0, 1), got {y}"),
            ));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        Ok(self.upper_quantile(1.0 - y))
    }

    /// F⁻¹(1 − q) for q in (0, 1], evaluated from the upper tail so that tiny
    /// q keeps its precision. Returns 0 at q = 1.
    pub fn upper_quantile(&self, q: f64) -> f64 {
        debug_assert!(q > 0.0 && q <= 1.0);
        if q >= 1.0 {
            return 0.0;
        }
        (self.log_mean + self.log_std * upper_quantile_unchecked(q)).exp()
    }

    /// E[min(d, a)], the expected units sold when `a` units are stocked.
    pub fn expected_min(&self, a: f64) -> f64 {
        if a <= 0.0 {
            return 0.0;
        }
        if a.is_infinite() {
            return self.mean();
        }
        let (mu, s) = (self.log_mean, self.log_std);
        let z = (a.ln() - mu) / s;
        self.mean() * std_normal_cdf(z - s) + a * std_normal_sf(z)
    }
}

/// Log-space parameters whose log-normal has the given mean and standard deviation.
pub fn moment_match(mean: f64, std: f64) -> Result<MarginalLogNormal> {
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::domain(
            "moment_match",
            format!("mean must be positive, got {mean}"),
        ));
    }
    if !(std > 0.0 && std.is_finite()) {
        return Err(Error::domain(
            "moment_match",
            format!("std must be positive, got {std}"),
        ));
    }
    let cv = std / mean;
    let log_var = (cv * cv).ln_1p();
    MarginalLogNormal::new(mean.ln() - 0.5 * log_var, log_var.sqrt())
}
