//! Allocation policies evaluated on a realized demand path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::conditional_marginals;
use crate::solver::{argmax, round_to_integers, solve_marginals, solve_static, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    Oracle,
    Sequential,
    Static,
    RollForward,
}

impl Policy {
    pub const ALL: [Policy; 4] = [
        Policy::Oracle,
        Policy::Sequential,
        Policy::Static,
        Policy::RollForward,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Oracle => "oracle",
            Policy::Sequential => "sequential",
            Policy::Static => "static",
            Policy::RollForward => "roll-forward",
        }
    }
}

impl std::fmt::Display for Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Solver settings shared by the model-based policies.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PolicyOptions {
    /// Bisection tolerance on the multiplier; `None` means `1e-12 · max price`.
    pub eps: Option<f64>,
    /// Commit integer allocations. The budget is floored to an integer.
    pub integer: bool,
}

impl PolicyOptions {
    fn eps_for(&self, prices: &[f64]) -> f64 {
        self.eps
            .unwrap_or_else(|| crate::solver::default_eps(prices))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyResult {
    pub alloc: Vec<f64>,
    pub revenue: f64,
    pub per_period_revenue: Vec<f64>,
}

impl PolicyResult {
    /// Scores `alloc` against the realized demands.
    pub fn evaluate(prices: &[f64], demand: &[f64], alloc: Vec<f64>) -> Self {
        let per_period_revenue: Vec<f64> = prices
            .iter()
            .zip(demand)
            .zip(&alloc)
            .map(|((&p, &d), &a)| p * d.min(a))
            .collect();
        let revenue = per_period_revenue.iter().sum();
        Self {
            alloc,
            revenue,
            per_period_revenue,
        }
    }

    /// Running total of the per-period revenue.
    pub fn cumulative_revenue(&self) -> Vec<f64> {
        self.per_period_revenue
            .iter()
            .scan(0.0, |acc, &r| {
                *acc += r;
                Some(*acc)
            })
            .collect()
    }
}

/// Bookkeeping for one run of a causal policy.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeState {
    pub remaining_budget: f64,
    pub observed: Vec<(usize, f64)>,
    pub committed: Vec<f64>,
}

impl EpisodeState {
    pub fn new(limit: f64) -> Self {
        Self {
            remaining_budget: limit,
            observed: Vec::new(),
            committed: Vec::new(),
        }
    }

    pub fn period(&self) -> usize {
        self.committed.len()
    }

    /// Records `alloc` for the current period, then the demand seen there.
    pub fn commit(&mut self, alloc: f64, demand: f64) {
        let t = self.period();
        self.committed.push(alloc);
        self.remaining_budget = (self.remaining_budget - alloc).max(0.0);
        self.observed.push((t, demand));
    }
}

fn check_path(inst: &Instance, demand: &[f64]) -> Result<()> {
    if demand.len() != inst.horizon() {
        return Err(Error::invalid(
            "demand_path",
            format!(
                "length {} does not match horizon {}",
                demand.len(),
                inst.horizon()
            ),
        ));
    }
    if let Some((i, d)) = demand
        .iter()
        .enumerate()
        .find(|(_, d)| !(**d > 0.0 && d.is_finite()))
    {
        return Err(Error::invalid(
            format!("demand_path[{i}]"),
            format!("demand must be positive, got {d}"),
        ));
    }
    Ok(())
}

fn integer_budget(limit: f64) -> u64 {
    limit.floor().max(0.0) as u64
}

/// Open loop: the static plan, whatever the demands turn out to be.
pub fn run_static(inst: &Instance, demand: &[f64], opts: PolicyOptions) -> Result<PolicyResult> {
    check_path(inst, demand)?;
    let alloc = if opts.integer {
        let budget = integer_budget(inst.limit());
        if budget == 0 {
            vec![0.0; inst.horizon()]
        } else {
            let plan = solve_static(
                &inst.with_limit(budget as f64)?,
                opts.eps_for(inst.prices()),
            )?;
            round_to_integers(&plan.alloc, budget)
                .into_iter()
                .map(|a| a as f64)
                .collect()
        }
    } else {
        solve_static(inst, opts.eps_for(inst.prices()))?.alloc
    };
    Ok(PolicyResult::evaluate(inst.prices(), demand, alloc))
}

/// Shrinking horizon: at every period re-solve the residual problem under
/// the demand model conditioned on everything observed so far, and commit
/// only the first allocation.
pub fn run_sequential(
    inst: &Instance,
    demand: &[f64],
    opts: PolicyOptions,
) -> Result<PolicyResult> {
    check_path(inst, demand)?;
    let t_max = inst.horizon();
    let prices = inst.prices();
    let eps = opts.eps_for(prices);
    let limit = if opts.integer {
        integer_budget(inst.limit()) as f64
    } else {
        inst.limit()
    };
    let mut state = EpisodeState::new(limit);

    for tau in 0..t_max {
        let a = if state.remaining_budget <= 0.0 {
            0.0
        } else if tau + 1 == t_max {
            state.remaining_budget
        } else {
            let marginals = conditional_marginals(inst.model(), &state.observed)?;
            let plan = solve_marginals(&prices[tau..], &marginals, state.remaining_budget, eps)?;
            if opts.integer {
                round_to_integers(&plan.alloc, state.remaining_budget.round() as u64)[0] as f64
            } else {
                plan.alloc[0]
            }
        };
        state.commit(a, demand[tau]);
    }
    Ok(PolicyResult::evaluate(prices, demand, state.committed))
}

/// Baseline: L/T first, then replay the previous period's demand while the
/// budget lasts. Units left at the end stay unallocated.
pub fn run_roll_forward(inst: &Instance, demand: &[f64]) -> Result<PolicyResult> {
    check_path(inst, demand)?;
    let t_max = inst.horizon();
    let mut state = EpisodeState::new(inst.limit());
    for tau in 0..t_max {
        let a = if tau == 0 {
            inst.limit() / t_max as f64
        } else {
            let last = demand[tau - 1];
            if state.remaining_budget > last {
                last
            } else {
                state.remaining_budget
            }
        };
        state.commit(a, demand[tau]);
    }
    Ok(PolicyResult::evaluate(
        inst.prices(),
        demand,
        state.committed,
    ))
}

/// Prescient optimum for a known path. Periods are filled in decreasing
/// price order (earlier period on ties); leftover budget is parked on the
/// highest-price period.
pub fn run_oracle(inst: &Instance, demand: &[f64]) -> Result<PolicyResult> {
    check_path(inst, demand)?;
    Ok(PolicyResult::evaluate(
        inst.prices(),
        demand,
        oracle_allocation(inst.prices(), demand, inst.limit()),
    ))
}

pub fn oracle_allocation(prices: &[f64], demand: &[f64], limit: f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..prices.len()).collect();
    order.sort_by(|&i, &j| prices[j].total_cmp(&prices[i]).then(i.cmp(&j)));
    let mut alloc = vec![0.0; prices.len()];
    let mut remaining = limit;
    for &t in &order {
        let a = demand[t].min(remaining);
        alloc[t] = a;
        remaining -= a;
        if remaining <= 0.0 {
            break;
        }
    }
    if remaining > 0.0 {
        alloc[argmax(prices)] += remaining;
    }
    alloc
}

/// Runs a policy by tag.
pub fn run_policy(
    policy: Policy,
    inst: &Instance,
    demand: &[f64],
    opts: PolicyOptions,
) -> Result<PolicyResult> {
    match policy {
        Policy::Oracle => run_oracle(inst, demand),
        Policy::Sequential => run_sequential(inst, demand, opts),
        Policy::Static => run_static(inst, demand, opts),
        Policy::RollForward => run_roll_forward(inst, demand),
    }
}
