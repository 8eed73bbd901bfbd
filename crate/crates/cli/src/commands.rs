use std::path::{Path, PathBuf};

use seqalloc::sim::{self, aggregate, generate_instance};
use seqalloc::solver::{default_eps, round_to_integers, solve_static};
use seqalloc::Instance;
use serde::Serialize;

use crate::config::{FileConfig, Overrides};
use crate::error::{CliError, CliResult};
use crate::instance_file;
use crate::output::{self, sha256_hex};

pub const TOOL_VERSION: &str = concat!("seqalloc ", env!("CARGO_PKG_VERSION"));

/// Loads the config file, applies overrides and validates the result.
pub fn resolve_config(config: Option<&Path>, overrides: &Overrides) -> CliResult<FileConfig> {
    let cfg = FileConfig::load(config)?.apply(overrides);
    cfg.validate()?;
    Ok(cfg)
}

/// The fixed instance named in the config, or a freshly generated one.
pub fn resolve_instance(cfg: &FileConfig) -> CliResult<Instance> {
    match &cfg.instance {
        Some(path) => instance_file::load(path),
        None => Ok(generate_instance(&cfg.sim_config(), cfg.instance_seed())?),
    }
}

#[derive(Debug, Serialize)]
struct Summary {
    dual: f64,
    expected_revenue: f64,
    iterations: usize,
    eps: f64,
    limit: f64,
    horizon: usize,
    integer: bool,
}

pub fn cmd_solve(cfg: &FileConfig) -> CliResult<PathBuf> {
    let inst = resolve_instance(cfg)?;
    let eps = cfg.eps.unwrap_or_else(|| default_eps(inst.prices()));
    let marginals = inst.marginals()?;

    let (plan, alloc) = if cfg.integer {
        let budget = inst.limit().floor().max(0.0);
        let plan = solve_static(&inst.with_limit(budget)?, eps)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        let alloc = round_to_integers(&plan.alloc, budget as u64)
            .into_iter()
            .map(|a| a as f64)
            .collect();
        (plan, alloc)
    } else {
        let plan = solve_static(&inst, eps).map_err(|e| CliError::Runtime(e.to_string()))?;
        let alloc = plan.alloc.clone();
        (plan, alloc)
    };

    let per_period: Vec<f64> = inst
        .prices()
        .iter()
        .zip(&marginals)
        .zip(&alloc)
        .map(|((p, m), &a)| p * m.expected_min(a))
        .collect();
    let summary = Summary {
        dual: plan.dual,
        expected_revenue: per_period.iter().sum(),
        iterations: plan.iterations,
        eps,
        limit: inst.limit(),
        horizon: inst.horizon(),
        integer: cfg.integer,
    };

    output::ensure_dir(&cfg.out)?;
    output::write_text(
        &cfg.out,
        "allocation.csv",
        &output::allocation_csv(inst.prices(), &alloc, &per_period),
    )?;
    output::write_json(&cfg.out, "summary.json", &summary)?;
    log::info!(
        "solved T={} L={} revenue={} in {} iterations",
        inst.horizon(),
        inst.limit(),
        summary.expected_revenue,
        plan.iterations
    );
    Ok(cfg.out.clone())
}

#[derive(Debug, Serialize)]
pub struct FileChecksum {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct TrialFailure {
    pub message: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub master_seed: u64,
    pub instance_seed: u64,
    pub threads: Option<usize>,
    pub config: FileConfig,
    pub checksums: Vec<FileChecksum>,
    pub failures: Vec<TrialFailure>,
    pub warning_count: usize,
}

/// Runs every policy over `cfg.trials` sampled demand paths. `threads`
/// sizes a dedicated pool; `None` uses rayon's default.
pub fn cmd_simulate(cfg: &FileConfig, threads: Option<usize>) -> CliResult<PathBuf> {
    let inst = resolve_instance(cfg)?;
    let mut sim_cfg = cfg.sim_config();
    sim_cfg.horizon = inst.horizon();
    sim_cfg.validate()?;

    let batch = run_with_threads(&inst, &sim_cfg, threads)?;
    if batch.records.is_empty() {
        return Err(CliError::Runtime(format!(
            "all {} trials failed; first error: {}",
            sim_cfg.n_trials,
            batch
                .failures
                .first()
                .map_or(String::new(), |e| e.to_string())
        )));
    }
    let report = aggregate(&batch.records).map_err(|e| CliError::Runtime(e.to_string()))?;

    let mut warning_count = batch.failures.len();
    if report.single_trial {
        warning_count += 1;
    }

    output::ensure_dir(&cfg.out)?;
    let mut checksums = Vec::new();
    let bodies = [
        ("trials.csv", output::trials_csv(&batch.records)),
        ("aggregate.csv", output::aggregate_csv(&report)),
        ("traces.csv", output::traces_csv(&report)),
    ];
    for (name, body) in &bodies {
        output::write_text(&cfg.out, name, body)?;
        checksums.push(FileChecksum {
            file: name.to_string(),
            sha256: sha256_hex(body.as_bytes()),
        });
    }
    instance_file::save(&inst, &cfg.out.join("instance.json"))?;

    let manifest = RunManifest {
        tool_version: TOOL_VERSION.to_string(),
        master_seed: cfg.seed,
        instance_seed: cfg.instance_seed(),
        threads,
        config: cfg.clone(),
        checksums,
        failures: batch
            .failures
            .iter()
            .map(|e| TrialFailure {
                message: e.to_string(),
            })
            .collect(),
        warning_count,
    };
    output::write_json(&cfg.out, "manifest.json", &manifest)?;
    for st in &report.stats {
        log::info!("{}: mean={} std={}", st.policy, st.mean, st.std);
    }
    Ok(cfg.out.clone())
}

#[cfg(feature = "parallel")]
fn run_with_threads(
    inst: &Instance,
    cfg: &sim::SimConfig,
    threads: Option<usize>,
) -> CliResult<sim::TrialBatch> {
    match threads {
        None => Ok(sim::run_trials(inst, cfg)?),
        Some(0) => Err(CliError::Validation("threads: must be at least 1".into())),
        Some(1) => Ok(sim::run_trials_serial(inst, cfg)?),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
            Ok(pool.install(|| sim::run_trials_parallel(inst, cfg))?)
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn run_with_threads(
    inst: &Instance,
    cfg: &sim::SimConfig,
    threads: Option<usize>,
) -> CliResult<sim::TrialBatch> {
    if threads == Some(0) {
        return Err(CliError::Validation("threads: must be at least 1".into()));
    }
    Ok(sim::run_trials_serial(inst, cfg)?)
}

/// Writes a generated instance to `<out>/instance.json` and returns its path.
pub fn cmd_gen_scenario(cfg: &FileConfig) -> CliResult<PathBuf> {
    let inst = generate_instance(&cfg.sim_config(), cfg.instance_seed())?;
    output::ensure_dir(&cfg.out)?;
    let path = cfg.out.join("instance.json");
    instance_file::save(&inst, &path)?;
    Ok(path)
}
