//! Synthetic scenarios and the Monte Carlo trial harness.
//!
//! One instance is drawn per experiment from `instance_seed`; trial `i`
//! then samples its demand path from stream `i` of `master_seed`. Every
//! trial is a pure function of `(instance, master_seed, i)`, so the output
//! does not depend on how trials are scheduled across threads.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policies::{run_policy, Policy, PolicyOptions, PolicyResult};
use crate::prob::{moment_match, path_rng, project_to_correlation, DemandModel, PathSampler};
use crate::solver::Instance;

/// Stream reserved for instance generation; trial streams count up from 0.
const INSTANCE_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMode {
    Independent,
    RandomSign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon: usize,
    pub n_trials: usize,
    pub master_seed: u64,
    pub price_range: [f64; 2],
    pub demand_mean_range: [f64; 2],
    pub demand_std_range: [f64; 2],
    pub correlation_magnitude: f64,
    pub correlation_mode: CorrelationMode,
    pub budget_fraction_range: [f64; 2],
    /// Bisection tolerance; `None` uses `1e-12 · max price`.
    pub eps: Option<f64>,
    pub integer_mode: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            horizon: 20,
            n_trials: 100,
            master_seed: 0,
            price_range: [10.0, 100.0],
            demand_mean_range: [20.0, 100.0],
            demand_std_range: [10.0, 30.0],
            correlation_magnitude: 0.7,
            correlation_mode: CorrelationMode::RandomSign,
            budget_fraction_range: [0.3, 0.6],
            eps: None,
            integer_mode: false,
        }
    }
}

fn check_range(name: &str, r: [f64; 2]) -> Result<()> {
    if !(r[0].is_finite() && r[1].is_finite()) || r[0] <= 0.0 || r[0] > r[1] {
        return Err(Error::invalid(
            name,
            format!("need 0 < lo <= hi, got [{}, {}]", r[0], r[1]),
        ));
    }
    Ok(())
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::invalid("horizon", "must be at least 1"));
        }
        if self.n_trials == 0 {
            return Err(Error::invalid("n_trials", "must be at least 1"));
        }
        check_range("price_range", self.price_range)?;
        check_range("demand_mean_range", self.demand_mean_range)?;
        check_range("demand_std_range", self.demand_std_range)?;
        check_range("budget_fraction_range", self.budget_fraction_range)?;
        if self.budget_fraction_range[1] > 1.0 {
            return Err(Error::invalid(
                "budget_fraction_range",
                "fractions must lie in (0, 1]",
            ));
        }
        if !(0.0..1.0).contains(&self.correlation_magnitude) {
            return Err(Error::invalid(
                "correlation_magnitude",
                format!("must lie in [0, 1), got {}", self.correlation_magnitude),
            ));
        }
        if let Some(eps) = self.eps {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::invalid(
                    "eps",
                    format!("must be positive, got {eps}"),
                ));
            }
        }
        Ok(())
    }

    pub fn policy_options(&self) -> PolicyOptions {
        PolicyOptions {
            eps: self.eps,
            integer: self.integer_mode,
        }
    }
}

fn uniform<R: Rng>(rng: &mut R, r: [f64; 2]) -> f64 {
    if r[0] == r[1] {
        r[0]
    } else {
        rng.random_range(r[0]..r[1])
    }
}

/// Draws a synthetic instance.
///
/// Draw order: T prices, T demand means, T demand stds, the budget
/// fraction, then (random-sign mode) one fair coin per upper-triangular
/// correlation entry in row-major order.
pub fn generate_instance(cfg: &SimConfig, seed: u64) -> Result<Instance> {
    cfg.validate()?;
    let t = cfg.horizon;
    let mut rng = path_rng(seed, INSTANCE_STREAM);

    let prices: Vec<f64> = (0..t).map(|_| uniform(&mut rng, cfg.price_range)).collect();
    let means: Vec<f64> = (0..t)
        .map(|_| uniform(&mut rng, cfg.demand_mean_range))
        .collect();
    let stds: Vec<f64> = (0..t)
        .map(|_| uniform(&mut rng, cfg.demand_std_range))
        .collect();
    let fraction = uniform(&mut rng, cfg.budget_fraction_range);

    let marginals = means
        .iter()
        .zip(&stds)
        .map(|(&m, &s)| moment_match(m, s))
        .collect::<Result<Vec<_>>>()?;

    let corr = match cfg.correlation_mode {
        CorrelationMode::Independent => DMatrix::identity(t, t),
        CorrelationMode::RandomSign => {
            let mut raw = DMatrix::identity(t, t);
            for i in 0..t {
                for j in (i + 1)..t {
                    let v = if rng.random_bool(0.5) {
                        cfg.correlation_magnitude
                    } else {
                        -cfg.correlation_magnitude
                    };
                    raw[(i, j)] = v;
                    raw[(j, i)] = v;
                }
            }
            project_to_correlation(&raw)?
        }
    };

    let log_std = DVector::from_iterator(t, marginals.iter().map(|m| m.log_std()));
    let sigma = DMatrix::from_fn(t, t, |i, j| {
        if i == j {
            log_std[i] * log_std[i]
        } else {
            corr[(i, j)] * log_std[i] * log_std[j]
        }
    });
    let mu = DVector::from_iterator(t, marginals.iter().map(|m| m.log_mean()));
    let model = DemandModel::new(mu, sigma)?;
    let limit = fraction * means.iter().sum::<f64>();
    Instance::new(prices, limit, model)
}

/// Outcome of one policy on one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyOutcome {
    pub policy: Policy,
    pub alloc: Vec<f64>,
    pub revenue: f64,
    pub cumulative_revenue: Vec<f64>,
}

impl PolicyOutcome {
    fn from_result(policy: Policy, r: PolicyResult) -> Self {
        let cumulative_revenue = r.cumulative_revenue();
        Self {
            policy,
            alloc: r.alloc,
            revenue: r.revenue,
            cumulative_revenue,
        }
    }
}

/// One realized demand path and how every policy fared on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub demand_path: Vec<f64>,
    /// One entry per policy, in `Policy::ALL` order.
    pub outcomes: Vec<PolicyOutcome>,
}

impl TrialRecord {
    pub fn outcome(&self, policy: Policy) -> &PolicyOutcome {
        self.outcomes
            .iter()
            .find(|o| o.policy == policy)
            .expect("every trial records all policies")
    }

    pub fn revenue(&self, policy: Policy) -> f64 {
        self.outcome(policy).revenue
    }
}

/// Trial results in index order; failed trials are kept with their index.
#[derive(Debug, Clone, Default)]
pub struct TrialBatch {
    pub records: Vec<TrialRecord>,
    pub failures: Vec<Error>,
}

/// Runs one trial: sample path `index` and evaluate every policy on it.
pub fn run_trial(
    inst: &Instance,
    sampler: &PathSampler,
    cfg: &SimConfig,
    index: usize,
) -> Result<TrialRecord> {
    let path = sampler.sample_indexed(cfg.master_seed, index as u64);
    let opts = cfg.policy_options();
    let outcomes = Policy::ALL
        .iter()
        .map(|&p| run_policy(p, inst, &path, opts).map(|r| PolicyOutcome::from_result(p, r)))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Trial {
            index,
            source: Box::new(e),
        })?;
    Ok(TrialRecord {
        trial_index: index,
        demand_path: path,
        outcomes,
    })
}

fn collect(results: Vec<Result<TrialRecord>>) -> TrialBatch {
    let mut batch = TrialBatch::default();
    for r in results {
        match r {
            Ok(rec) => batch.records.push(rec),
            Err(e) => {
                log::warn!("{e}");
                batch.failures.push(e);
            }
        }
    }
    batch
}

/// Runs `cfg.n_trials` trials one after another on the calling thread.
pub fn run_trials_serial(inst: &Instance, cfg: &SimConfig) -> Result<TrialBatch> {
    cfg.validate()?;
    let sampler = PathSampler::new(inst.model())?;
    Ok(collect(
        (0..cfg.n_trials)
            .map(|i| run_trial(inst, &sampler, cfg, i))
            .collect(),
    ))
}

/// Runs `cfg.n_trials` trials on the current rayon pool. Output is
/// identical to [`run_trials_serial`].
#[cfg(feature = "parallel")]
pub fn run_trials_parallel(inst: &Instance, cfg: &SimConfig) -> Result<TrialBatch> {
    use rayon::prelude::*;

    cfg.validate()?;
    let sampler = PathSampler::new(inst.model())?;
    Ok(collect(
        (0..cfg.n_trials)
            .into_par_iter()
            .map(|i| run_trial(inst, &sampler, cfg, i))
            .collect(),
    ))
}

/// Runs all trials, in parallel when the `parallel` feature is enabled.
pub fn run_trials(inst: &Instance, cfg: &SimConfig) -> Result<TrialBatch> {
    #[cfg(feature = "parallel")]
    {
        run_trials_parallel(inst, cfg)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_trials_serial(inst, cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyStats {
    pub policy: Policy,
    pub mean: f64,
    /// Sample standard deviation (divisor n − 1); 0 for a single trial.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

/// Pointwise mean and standard deviation of the cumulative revenue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub policy: Policy,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub n_trials: usize,
    pub stats: Vec<PolicyStats>,
    pub traces: Vec<Trace>,
    /// Set when only one trial was aggregated and the std is not meaningful.
    pub single_trial: bool,
}

impl AggregateReport {
    pub fn stats_for(&self, policy: Policy) -> &PolicyStats {
        self.stats
            .iter()
            .find(|s| s.policy == policy)
            .expect("aggregate covers all policies")
    }

    pub fn mean(&self, policy: Policy) -> f64 {
        self.stats_for(policy).mean
    }
}

fn mean_std(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = values.clone().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

/// Folds trial records (sorted by trial index) into per-policy statistics.
pub fn aggregate(records: &[TrialRecord]) -> Result<AggregateReport> {
    let n = records.len();
    if n == 0 {
        return Err(Error::invalid("records", "cannot aggregate zero trials"));
    }
    let mut sorted: Vec<&TrialRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.trial_index);
    let horizon = sorted[0].demand_path.len();
    if n == 1 {
        log::warn!("aggregating a single trial; standard deviations reported as 0");
    }

    let stats = Policy::ALL
        .iter()
        .map(|&policy| {
            let revenues = sorted.iter().map(move |r| r.revenue(policy));
            let (mean, std) = mean_std(revenues.clone(), n);
            PolicyStats {
                policy,
                mean,
                std,
                min: revenues.clone().fold(f64::INFINITY, f64::min),
                max: revenues.fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect();

    let traces = Policy::ALL
        .iter()
        .map(|&policy| {
            let (mean, std) = (0..horizon)
                .map(|t| {
                    mean_std(
                        sorted
                            .iter()
                            .map(move |r| r.outcome(policy).cumulative_revenue[t]),
                        n,
                    )
                })
                .unzip();
            Trace { policy, mean, std }
        })
        .collect();

    Ok(AggregateReport {
        n_trials: n,
        stats,
        traces,
        single_trial: n == 1,
    })
}
