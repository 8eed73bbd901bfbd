//! Probability layer: normal and log-normal marginals, Gaussian conditioning,
//! correlation projection and path sampling.

mod correlation;
mod gaussian;
pub mod linalg;
mod lognormal;
mod normal;
mod sampling;

pub use correlation::project_to_correlation;
pub use gaussian::{
    condition, conditional_marginals, ConditionalModel, DemandModel, MIN_LOG_VARIANCE, PSD_TOL,
    SYMMETRY_TOL,
};
pub use lognormal::{moment_match, MarginalLogNormal};
pub use normal::{std_normal_cdf, std_normal_pdf, std_normal_quantile, std_normal_sf};
pub use sampling::{path_rng, sample_paths, PathSampler};
