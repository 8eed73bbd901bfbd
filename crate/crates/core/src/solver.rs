//! Static allocation: bisection on the budget multiplier.
//!
//! For a multiplier ν the optimal stock in period t is the quantile of its
//! demand at level 1 − ν/p_t (zero once ν ≥ p_t). Total stock is
//! nonincreasing in ν, so the ν that exhausts the budget is found by
//! bisection on [0, max p].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{DemandModel, MarginalLogNormal};

/// One allocation problem: prices, budget and the joint demand model.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    prices: Vec<f64>,
    limit: f64,
    model: DemandModel,
}

impl Instance {
    pub fn new(prices: Vec<f64>, limit: f64, model: DemandModel) -> Result<Self> {
        validate_problem(&prices, limit)?;
        if prices.len() != model.horizon() {
            return Err(Error::invalid(
                "prices",
                format!(
                    "length {} does not match the demand model horizon {}",
                    prices.len(),
                    model.horizon()
                ),
            ));
        }
        Ok(Self {
            prices,
            limit,
            model,
        })
    }

    pub fn horizon(&self) -> usize {
        self.prices.len()
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn limit(&self) -> f64 {
        self.limit
    }

    pub fn model(&self) -> &DemandModel {
        &self.model
    }

    pub fn marginals(&self) -> Result<Vec<MarginalLogNormal>> {
        self.model.marginals()
    }

    pub fn with_limit(&self, limit: f64) -> Result<Self> {
        Self::new(self.prices.clone(), limit, self.model.clone())
    }
}

fn validate_problem(prices: &[f64], limit: f64) -> Result<()> {
    if prices.is_empty() {
        return Err(Error::invalid("prices", "horizon must be at least 1"));
    }
    if let Some((i, p)) = prices
        .iter()
        .enumerate()
        .find(|(_, p)| !(**p > 0.0 && p.is_finite()))
    {
        return Err(Error::invalid(
            format!("prices[{i}]"),
            format!("price must be positive and finite, got {p}"),
        ));
    }
    if !(limit > 0.0 && limit.is_finite()) {
        return Err(Error::invalid(
            "limit",
            format!("resource limit must be positive and finite, got {limit}"),
        ));
    }
    Ok(())
}

/// Per-period allocations with the multiplier that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationPlan {
    pub alloc: Vec<f64>,
    pub dual: f64,
    pub expected_revenue: f64,
    pub iterations: usize,
}

/// Solver tolerance on ν used when none is given.
pub fn default_eps(prices: &[f64]) -> f64 {
    1e-12 * max_price(prices)
}

fn max_price(prices: &[f64]) -> f64 {
    prices.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Number of halvings needed to shrink [0, max p] below `eps`.
pub fn bisection_iterations(max_price: f64, eps: f64) -> usize {
    (max_price / eps).log2().ceil().max(1.0) as usize
}

/// Stock levels for multiplier `nu`. At ν = 0 every period asks for its
/// unbounded quantile, reported as `f64::INFINITY`.
pub fn alloc_from_dual_marginals(
    prices: &[f64],
    marginals: &[MarginalLogNormal],
    nu: f64,
) -> Vec<f64> {
    prices
        .iter()
        .zip(marginals)
        .map(|(&p, m)| {
            let ratio = nu / p;
            if ratio >= 1.0 {
                0.0
            } else if ratio <= 0.0 {
                f64::INFINITY
            } else {
                m.upper_quantile(ratio)
            }
        })
        .collect()
}

pub fn alloc_from_dual(inst: &Instance, nu: f64) -> Result<Vec<f64>> {
    if nu.is_nan() || nu < 0.0 {
        return Err(Error::domain(
            "alloc_from_dual",
            format!("nu must be nonnegative, got {nu}"),
        ));
    }
    Ok(alloc_from_dual_marginals(
        inst.prices(),
        &inst.marginals()?,
        nu,
    ))
}

/// Σ p_t E[min(d_t, a_t)].
pub fn expected_revenue(prices: &[f64], marginals: &[MarginalLogNormal], alloc: &[f64]) -> f64 {
    prices
        .iter()
        .zip(marginals)
        .zip(alloc)
        .map(|((&p, m), &a)| p * m.expected_min(a))
        .sum()
}

/// Convex combination of the bracket allocations with total exactly `limit`.
///
/// `over` sums to at least `limit`, `under` to less. Periods whose stock is
/// nearly flat in ν barely move; a period sitting at its price threshold
/// (stock collapsing to 0 as ν → p_t) absorbs the remaining gap.
fn blend_to_budget(over: &[f64], under: &[f64], limit: f64) -> Vec<f64> {
    let s_over: f64 = over.iter().sum();
    let s_under: f64 = under.iter().sum();
    let theta = if s_over > s_under {
        ((limit - s_under) / (s_over - s_under)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let mut alloc: Vec<f64> = over
        .iter()
        .zip(under)
        .map(|(&o, &u)| theta * o + (1.0 - theta) * u)
        .collect();
    // Clean up the last few ulps of the blend.
    let total: f64 = alloc.iter().sum();
    if total > 0.0 {
        let scale = limit / total;
        alloc.iter_mut().for_each(|a| *a *= scale);
    }
    alloc
}

/// Multiplicative rescale, used when the bracket never produced an
/// over-budget allocation (budget beyond every evaluated quantile).
fn scale_to_budget(mut alloc: Vec<f64>, limit: f64, prices: &[f64]) -> Vec<f64> {
    let total: f64 = alloc.iter().sum();
    if total > 0.0 && total.is_finite() {
        let scale = limit / total;
        alloc.iter_mut().for_each(|a| *a *= scale);
    } else {
        // Only reachable if every quantile underflowed; give the whole budget
        // to the best-paying period.
        alloc = vec![0.0; prices.len()];
        alloc[argmax(prices)] = limit;
    }
    alloc
}

/// Bisection on ν for explicit marginals. Used directly by the sequential
/// policy with conditional marginals.
pub fn solve_marginals(
    prices: &[f64],
    marginals: &[MarginalLogNormal],
    limit: f64,
    eps: f64,
) -> Result<AllocationPlan> {
    validate_problem(prices, limit)?;
    if marginals.len() != prices.len() {
        return Err(Error::invalid(
            "marginals",
            format!(
                "expected {} marginals, got {}",
                prices.len(),
                marginals.len()
            ),
        ));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(
            "eps",
            format!("tolerance must be positive, got {eps}"),
        ));
    }

    let p_max = max_price(prices);
    let iterations = bisection_iterations(p_max, eps);
    // ν = 0 is never evaluated: its allocation is unbounded and always
    // exceeds the budget, which is exactly what `low` stands for.
    let (mut low, mut up) = (0.0f64, p_max);
    let mut alloc_low: Option<Vec<f64>> = None;
    let mut alloc_up = vec![0.0; prices.len()];
    let mut mid = 0.5 * (low + up);
    for _ in 0..iterations {
        mid = 0.5 * (low + up);
        let alloc = alloc_from_dual_marginals(prices, marginals, mid);
        if alloc.iter().sum::<f64>() >= limit {
            low = mid;
            alloc_low = Some(alloc);
        } else {
            up = mid;
            alloc_up = alloc;
        }
    }

    let alloc = match alloc_low {
        Some(over) => blend_to_budget(&over, &alloc_up, limit),
        None => scale_to_budget(alloc_up, limit, prices),
    };
    let expected_revenue = expected_revenue(prices, marginals, &alloc);
    Ok(AllocationPlan {
        alloc,
        dual: mid,
        expected_revenue,
        iterations,
    })
}

pub fn solve_static(inst: &Instance, eps: f64) -> Result<AllocationPlan> {
    solve_marginals(inst.prices(), &inst.marginals()?, inst.limit(), eps)
}

/// Index of the largest value; earliest index on ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > values[best] { i } else { best })
}

/// Rounds an allocation to integers summing to `limit`.
///
/// Each entry is floored, then the missing units go to the largest
/// fractional remainders (earlier index first on ties).
pub fn round_to_integers(alloc: &[f64], limit: u64) -> Vec<u64> {
    let floors: Vec<u64> = alloc.iter().map(|&a| a.max(0.0).floor() as u64).collect();
    let mut order: Vec<usize> = (0..alloc.len()).collect();
    let frac = |i: usize| alloc[i].max(0.0) - floors[i] as f64;
    let mut out = floors.clone();
    let assigned: u64 = floors.iter().sum();

    if assigned <= limit {
        order.sort_by(|&i, &j| frac(j).total_cmp(&frac(i)).then(i.cmp(&j)));
        let mut deficit = limit - assigned;
        // A deficit beyond one unit per entry only arises when the input did
        // not sum to `limit`; keep cycling in remainder order.
        while deficit > 0 && !order.is_empty() {
            for &i in &order {
                if deficit == 0 {
                    break;
                }
                out[i] += 1;
                deficit -= 1;
            }
        }
    } else {
        order.sort_by(|&i, &j| frac(i).total_cmp(&frac(j)).then(j.cmp(&i)));
        let mut surplus = assigned - limit;
        while surplus > 0 {
            for &i in &order {
                if surplus == 0 {
                    break;
                }
                if out[i] > 0 {
                    out[i] -= 1;
                    surplus -= 1;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::moment_match;
    use approx::assert_abs_diff_eq;

    fn iid_instance(prices: &[f64], m: MarginalLogNormal, limit: f64) -> Instance {
        let model = DemandModel::independent(&vec![m; prices.len()]).unwrap();
        Instance::new(prices.to_vec(), limit, model).unwrap()
    }

    #[test]
    fn instance_validation_names_field() {
        let m = MarginalLogNormal::new(0.0, 1.0).unwrap();
        let model = DemandModel::independent(&[m, m]).unwrap();
        let err = Instance::new(vec![1.0, -2.0], 1.0, model.clone()).unwrap_err();
        assert!(err.to_string().contains("prices[1]"));
        assert!(Instance::new(vec![1.0, 2.0], 0.0, model.clone()).is_err());
        assert!(Instance::new(vec![1.0], 1.0, model).is_err());
    }

    #[test]
    fn alloc_from_dual_examples() {
        let m = MarginalLogNormal::new(0.0, 1.0).unwrap();
        let inst = iid_instance(&[10.0, 20.0], m, 3.0);
        assert_eq!(alloc_from_dual(&inst, 20.0).unwrap(), vec![0.0, 0.0]);
        assert!(alloc_from_dual(&inst, 0.0)
            .unwrap()
            .iter()
            .all(|a| a.is_infinite()));
        assert!(alloc_from_dual(&inst, -1.0).is_err());

        let single = iid_instance(&[10.0], m, 3.0);
        assert_abs_diff_eq!(
            alloc_from_dual(&single, 5.0).unwrap()[0],
            1.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn single_period_gets_everything() {
        let m = moment_match(40.0, 25.0).unwrap();
        for (price, limit) in [(3.0, 1.0), (80.0, 1000.0), (10.0, 40.0)] {
            let plan = solve_static(&iid_instance(&[price], m, limit), 1e-9).unwrap();
            assert_abs_diff_eq!(plan.alloc[0], limit, epsilon = 1e-12 * limit);
        }
    }

    #[test]
    fn symmetric_pair_splits_evenly() {
        let m = moment_match(30.0, 12.0).unwrap();
        for limit in [1.0, 25.0, 60.0, 500.0] {
            let plan = solve_static(&iid_instance(&[7.0, 7.0], m, limit), 1e-9 * 7.0).unwrap();
            assert_abs_diff_eq!(plan.alloc[0], limit / 2.0, epsilon = 1e-6 * limit);
            assert_abs_diff_eq!(plan.alloc[1], limit / 2.0, epsilon = 1e-6 * limit);
        }
    }

    #[test]
    fn three_period_grid_oracle() {
        // Brute force over the 0.01 grid of the scaled simplex (scipy,
        // objective through the closed-form E[min(d, a)]): best grid point
        // (0.00, 13.56, 46.44).
        let m = moment_match(50.0, 20.0).unwrap();
        let inst = iid_instance(&[10.0, 50.0, 100.0], m, 60.0);
        let plan = solve_static(&inst, default_eps(inst.prices())).unwrap();
        for (a, want) in plan.alloc.iter().zip([0.0, 13.56, 46.44]) {
            assert_abs_diff_eq!(*a, want, epsilon = 0.05);
        }
        assert_abs_diff_eq!(plan.expected_revenue, 4750.079392711106, epsilon = 0.01);
    }

    #[test]
    fn iteration_count_matches_bracket() {
        assert_eq!(bisection_iterations(100.0, 1e-7), 30);
        assert_eq!(bisection_iterations(1.0, 2.0), 1);
    }

    #[test]
    fn rounding_examples() {
        assert_eq!(round_to_integers(&[2.0, 3.0, 5.0], 10), vec![2, 3, 5]);
        assert_eq!(round_to_integers(&[2.5, 2.5, 5.0], 10), vec![3, 2, 5]);
        assert_eq!(round_to_integers(&[0.4, 0.3, 0.3], 1), vec![1, 0, 0]);
        assert_eq!(round_to_integers(&[0.0, 0.0], 0), vec![0, 0]);
    }

    #[test]
    fn rounding_repairs_off_budget_input() {
        assert_eq!(round_to_integers(&[3.2, 4.9], 10).iter().sum::<u64>(), 10);
        assert_eq!(round_to_integers(&[6.2, 6.9], 10).iter().sum::<u64>(), 10);
    }
}
