use nalgebra::{DMatrix, DVector};

use super::linalg::{is_symmetric, jittered_cholesky, min_eigenvalue};
use super::lognormal::MarginalLogNormal;
use crate::error::{Error, Result};

pub const SYMMETRY_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-8;

/// Conditional log-variances below this floor are clamped when building
/// marginals. Exactly collinear histories otherwise leave a zero variance.
pub const MIN_LOG_VARIANCE: f64 = 1e-18;

/// Joint law of the demands: `(ln d_1, ..., ln d_T) ~ N(mu, sigma)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandModel {
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
}

impl DemandModel {
    pub fn new(mu: DVector<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        let t = mu.len();
        if t == 0 {
            return Err(Error::invalid("mu", "horizon must be at least 1"));
        }
        if sigma.nrows() != t || sigma.ncols() != t {
            return Err(Error::invalid(
                "sigma",
                format!("expected {t}x{t}, got {}x{}", sigma.nrows(), sigma.ncols()),
            ));
        }
        if let Some(i) = mu.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("mu[{i}]"), "must be finite"));
        }
        if sigma.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("sigma", "entries must be finite"));
        }
        if !is_symmetric(&sigma, SYMMETRY_TOL) {
            return Err(Error::invalid("sigma", "matrix is not symmetric"));
        }
        let min_eig = min_eigenvalue(&sigma);
        if min_eig < -PSD_TOL {
            return Err(Error::invalid(
                "sigma",
                format!("matrix is not positive semi-definite (min eigenvalue {min_eig:e})"),
            ));
        }
        Ok(Self { mu, sigma })
    }

    /// Independent periods with the given marginals.
    pub fn independent(marginals: &[MarginalLogNormal]) -> Result<Self> {
        let mu = DVector::from_iterator(marginals.len(), marginals.iter().map(|m| m.log_mean()));
        let sigma = DMatrix::from_diagonal(&DVector::from_iterator(
            marginals.len(),
            marginals.iter().map(|m| m.log_std().powi(2)),
        ));
        Self::new(mu, sigma)
    }

    pub fn horizon(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn marginal(&self, t: usize) -> Result<MarginalLogNormal> {
        MarginalLogNormal::new(self.mu[t], self.sigma[(t, t)].sqrt())
    }

    pub fn marginals(&self) -> Result<Vec<MarginalLogNormal>> {
        (0..self.horizon()).map(|t| self.marginal(t)).collect()
    }
}

/// Law of the unobserved log demands given the observed ones.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalModel {
    /// Original period indices of the remaining coordinates, ascending.
    pub remaining: Vec<usize>,
    pub cond_mu: DVector<f64>,
    pub cond_sigma: DMatrix<f64>,
}

impl ConditionalModel {
    pub fn horizon(&self) -> usize {
        self.remaining.len()
    }

    pub fn marginals(&self) -> Result<Vec<MarginalLogNormal>> {
        (0..self.horizon())
            .map(|i| floored_marginal(self.cond_mu[i], self.cond_sigma[(i, i)]))
            .collect()
    }

    pub fn into_model(self) -> Result<DemandModel> {
        DemandModel::new(self.cond_mu, self.cond_sigma)
    }
}

fn floored_marginal(mean: f64, var: f64) -> Result<MarginalLogNormal> {
    MarginalLogNormal::new(mean, var.max(MIN_LOG_VARIANCE).sqrt())
}

/// Pieces shared by the full and the marginal-only conditioning paths.
struct Partition {
    remaining: Vec<usize>,
    cond_mu: DVector<f64>,
    /// L⁻¹ Σ_OR where L Lᵀ = Σ_OO + jitter·I; `None` when nothing is observed.
    whitened_cross: Option<DMatrix<f64>>,
}

fn partition(model: &DemandModel, observed: &[(usize, f64)]) -> Result<Partition> {
    let t = model.horizon();
    let mut is_obs = vec![false; t];
    for (k, &(idx, value)) in observed.iter().enumerate() {
        if idx >= t {
            return Err(Error::domain(
                "condition",
                format!("observed period {idx} out of range for horizon {t}"),
            ));
        }
        if is_obs[idx] {
            return Err(Error::domain(
                "condition",
                format!("period {idx} observed twice"),
            ));
        }
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::domain(
                "condition",
                format!("observation #{k} (period {idx}) must be a positive demand, got {value}"),
            ));
        }
        is_obs[idx] = true;
    }
    let remaining: Vec<usize> = (0..t).filter(|&i| !is_obs[i]).collect();
    if remaining.is_empty() {
        return Err(Error::domain("condition", "no unobserved periods remain"));
    }

    let mu = model.mu();
    let sigma = model.sigma();
    let mu_r = DVector::from_iterator(remaining.len(), remaining.iter().map(|&i| mu[i]));
    if observed.is_empty() {
        return Ok(Partition {
            remaining,
            cond_mu: mu_r,
            whitened_cross: None,
        });
    }

    let obs_idx: Vec<usize> = observed.iter().map(|&(i, _)| i).collect();
    let s_oo = sigma.select_rows(&obs_idx).select_columns(&obs_idx);
    let s_or = sigma.select_rows(&obs_idx).select_columns(&remaining);
    let resid = DVector::from_iterator(
        observed.len(),
        observed.iter().map(|&(i, v)| v.ln() - mu[i]),
    );

    let (chol, _) = jittered_cholesky(&s_oo)?;
    let l = chol.l();
    let w = l
        .solve_lower_triangular(&s_or)
        .expect("cholesky factor has a positive diagonal");
    let z = l
        .solve_lower_triangular(&resid)
        .expect("cholesky factor has a positive diagonal");
    let cond_mu = mu_r + w.tr_mul(&z);
    Ok(Partition {
        remaining,
        cond_mu,
        whitened_cross: Some(w),
    })
}

/// Gaussian conditioning of the log demands on observed demand values.
///
/// `observed` holds `(period, demand)` pairs; demands are in natural units
/// and are log-transformed here. Σ_OO is factorized with the jitter ladder
/// rather than inverted.
pub fn condition(model: &DemandModel, observed: &[(usize, f64)]) -> Result<ConditionalModel> {
    let part = partition(model, observed)?;
    let s_rr = model
        .sigma()
        .select_rows(&part.remaining)
        .select_columns(&part.remaining);
    let cond_sigma = match &part.whitened_cross {
        Some(w) => {
            let mut s = s_rr - w.tr_mul(w);
            // Restore exact symmetry lost to rounding in the product.
            let n = s.nrows();
            for i in 0..n {
                for j in 0..i {
                    let avg = 0.5 * (s[(i, j)] + s[(j, i)]);
                    s[(i, j)] = avg;
                    s[(j, i)] = avg;
                }
            }
            s
        }
        None => s_rr,
    };
    Ok(ConditionalModel {
        remaining: part.remaining,
        cond_mu: part.cond_mu,
        cond_sigma,
    })
}

/// Conditional marginals of the remaining periods only. Same result as
/// `condition(..).marginals()` without forming the full conditional covariance.
pub fn conditional_marginals(
    model: &DemandModel,
    observed: &[(usize, f64)],
) -> Result<Vec<MarginalLogNormal>> {
    let part = partition(model, observed)?;
    let sigma = model.sigma();
    part.remaining
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let explained = part
                .whitened_cross
                .as_ref()
                .map_or(0.0, |w| w.column(k).norm_squared());
            floored_marginal(part.cond_mu[k], sigma[(r, r)] - explained)
        })
        .collect()
}
