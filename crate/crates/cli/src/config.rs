//! Run configuration: a flat TOML file plus command-line overrides.
//!
//! ```toml
//! horizon = 50
//! trials = 100
//! seed = 7
//! correlation_mode = "random_sign"   # or "independent"
//! price_min = 10.0
//! price_max = 100.0
//! ```
//!
//! Every key is optional; unknown keys are rejected.

use std::path::{Path, PathBuf};

use seqalloc::sim::{CorrelationMode, SimConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub horizon: usize,
    pub trials: usize,
    pub seed: u64,
    /// Seed for the synthetic instance; defaults to `seed`.
    pub instance_seed: Option<u64>,
    /// Load a fixed instance instead of generating one.
    pub instance: Option<PathBuf>,
    pub price_min: f64,
    pub price_max: f64,
    pub demand_mean_min: f64,
    pub demand_mean_max: f64,
    pub demand_std_min: f64,
    pub demand_std_max: f64,
    pub correlation_magnitude: f64,
    pub correlation_mode: CorrelationMode,
    pub budget_fraction_min: f64,
    pub budget_fraction_max: f64,
    pub eps: Option<f64>,
    pub integer: bool,
    pub out: PathBuf,
}

impl Default for FileConfig {
    fn default() -> Self {
        let sim = SimConfig::default();
        Self {
            horizon: sim.horizon,
            trials: sim.n_trials,
            seed: sim.master_seed,
            instance_seed: None,
            instance: None,
            price_min: sim.price_range[0],
            price_max: sim.price_range[1],
            demand_mean_min: sim.demand_mean_range[0],
            demand_mean_max: sim.demand_mean_range[1],
            demand_std_min: sim.demand_std_range[0],
            demand_std_max: sim.demand_std_range[1],
            correlation_magnitude: sim.correlation_magnitude,
            correlation_mode: sim.correlation_mode,
            budget_fraction_min: sim.budget_fraction_range[0],
            budget_fraction_max: sim.budget_fraction_range[1],
            eps: None,
            integer: false,
            out: PathBuf::from("out"),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub trials: Option<usize>,
    pub horizon: Option<usize>,
    pub eps: Option<f64>,
    pub integer: bool,
    pub instance: Option<PathBuf>,
}

impl FileConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    /// Reads `path`, or the defaults when no path is given. A relative
    /// `instance` path is resolved against the config file's directory.
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            CliError::Validation(msg) => CliError::Validation(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        if let (Some(inst), Some(dir)) = (&cfg.instance, path.parent()) {
            if inst.is_relative() {
                cfg.instance = Some(dir.join(inst));
            }
        }
        Ok(cfg)
    }

    pub fn apply(mut self, o: &Overrides) -> Self {
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = &o.out {
            self.out = v.clone();
        }
        if let Some(v) = o.trials {
            self.trials = v;
        }
        if let Some(v) = o.horizon {
            self.horizon = v;
        }
        if let Some(v) = o.eps {
            self.eps = Some(v);
        }
        if o.integer {
            self.integer = true;
        }
        if let Some(v) = &o.instance {
            self.instance = Some(v.clone());
        }
        self
    }

    pub fn instance_seed(&self) -> u64 {
        self.instance_seed.unwrap_or(self.seed)
    }

    /// Field-level checks that name the offending key.
    pub fn validate(&self) -> CliResult<()> {
        let bad = |key: &str, msg: String| Err(CliError::Validation(format!("{key}: {msg}")));
        if self.horizon == 0 {
            return bad("horizon", "must be at least 1".into());
        }
        if self.trials == 0 {
            return bad("trials", "must be at least 1".into());
        }
        let positive = [
            ("price_min", self.price_min),
            ("price_max", self.price_max),
            ("demand_mean_min", self.demand_mean_min),
            ("demand_mean_max", self.demand_mean_max),
            ("demand_std_min", self.demand_std_min),
            ("demand_std_max", self.demand_std_max),
            ("budget_fraction_min", self.budget_fraction_min),
            ("budget_fraction_max", self.budget_fraction_max),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(key, format!("must be positive and finite, got {v}"));
            }
        }
        for (lo_key, lo, hi_key, hi) in [
            ("price_min", self.price_min, "price_max", self.price_max),
            (
                "demand_mean_min",
                self.demand_mean_min,
                "demand_mean_max",
                self.demand_mean_max,
            ),
            (
                "demand_std_min",
                self.demand_std_min,
                "demand_std_max",
                self.demand_std_max,
            ),
            (
                "budget_fraction_min",
                self.budget_fraction_min,
                "budget_fraction_max",
                self.budget_fraction_max,
            ),
        ] {
            if lo > hi {
                return bad(lo_key, format!("{lo} exceeds {hi_key} = {hi}"));
            }
        }
        if self.budget_fraction_max > 1.0 {
            return bad(
                "budget_fraction_max",
                format!("must be at most 1, got {}", self.budget_fraction_max),
            );
        }
        if !(0.0..1.0).contains(&self.correlation_magnitude) {
            return bad(
                "correlation_magnitude",
                format!("must lie in [0, 1), got {}", self.correlation_magnitude),
            );
        }
        if let Some(eps) = self.eps {
            if !(eps > 0.0 && eps.is_finite()) {
                return bad("eps", format!("must be positive, got {eps}"));
            }
        }
        Ok(())
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            horizon: self.horizon,
            n_trials: self.trials,
            master_seed: self.seed,
            price_range: [self.price_min, self.price_max],
            demand_mean_range: [self.demand_mean_min, self.demand_mean_max],
            demand_std_range: [self.demand_std_min, self.demand_std_max],
            correlation_magnitude: self.correlation_magnitude,
            correlation_mode: self.correlation_mode,
            budget_fraction_range: [self.budget_fraction_min, self.budget_fraction_max],
            eps: self.eps,
            integer_mode: self.integer,
        }
    }
}
