//! End-to-end acceptance checks. Each check prints one PASS/FAIL line;
//! the process exits nonzero if any check fails.
//!
//! Run with `cargo test -p seqalloc-cli --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use seqalloc::policies::{oracle_allocation, run_sequential, run_static, Policy, PolicyOptions};
use seqalloc::prob::{condition, moment_match, DemandModel, MarginalLogNormal, PathSampler};
use seqalloc::sim::{aggregate, generate_instance, run_trials, CorrelationMode, SimConfig};
use seqalloc::solver::{default_eps, solve_static};
use seqalloc::Instance;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_marginal(r: &mut ChaCha8Rng) -> MarginalLogNormal {
    moment_match(r.random_range(20.0..100.0), r.random_range(10.0..30.0)).unwrap()
}

fn random_instance(r: &mut ChaCha8Rng, t: usize, correlated: bool) -> Instance {
    let cfg = SimConfig {
        horizon: t,
        correlation_mode: if correlated {
            CorrelationMode::RandomSign
        } else {
            CorrelationMode::Independent
        },
        ..Default::default()
    };
    let inst = generate_instance(&cfg, r.random()).unwrap();
    let total: f64 = inst.marginals().unwrap().iter().map(|m| m.mean()).sum();
    inst.with_limit(r.random_range(0.05..1.2) * total).unwrap()
}

fn static_feasibility_and_kkt() -> Check {
    let mut r = rng(1001);
    let mut worst_sum = 0.0f64;
    let mut worst_kkt = 0.0f64;
    for k in 0..200 {
        let t = if k < 20 { 200 } else { r.random_range(1..=200) };
        let inst = random_instance(&mut r, t, k % 2 == 1);
        let plan = solve_static(&inst, default_eps(inst.prices())).map_err(|e| e.to_string())?;
        let sum: f64 = plan.alloc.iter().sum();
        let sum_err = (sum - inst.limit()).abs() / inst.limit();
        worst_sum = worst_sum.max(sum_err);
        ensure(sum_err <= 1e-9, || {
            format!("instance {k}: budget error {sum_err:e}·L")
        })?;
        ensure(plan.alloc.iter().all(|&a| a >= 0.0), || {
            format!("instance {k}: negative alloc")
        })?;
        let p_max = inst.prices().iter().copied().fold(0.0, f64::max);
        for ((&a, &p), m) in plan
            .alloc
            .iter()
            .zip(inst.prices())
            .zip(inst.marginals().unwrap())
        {
            if a > 0.0 {
                let resid = (p * m.survival(a) - plan.dual).abs() / p_max;
                worst_kkt = worst_kkt.max(resid);
                ensure(resid <= 1e-6, || {
                    format!("instance {k}: KKT residual {resid:e}·max p")
                })?;
            }
        }
    }

    let inst = random_instance(&mut r, 200, true);
    let eps = default_eps(inst.prices());
    let reps = 50;
    let start = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(solve_static(&inst, eps).unwrap());
    }
    let ms = start.elapsed().as_secs_f64() * 1e3 / reps as f64;
    ensure(ms < 10.0, || format!("T=200 solve took {ms:.3} ms"))?;
    Ok(format!(
        "max budget error {worst_sum:.1e}·L, max KKT residual {worst_kkt:.1e}·max p, {ms:.3} ms/solve at T=200"
    ))
}

fn grid_best(prices: &[f64], demand: &[f64], units: usize, step: f64) -> f64 {
    if prices.len() == 1 {
        return prices[0] * demand[0].min(units as f64 * step);
    }
    (0..=units)
        .map(|k| {
            prices[0] * demand[0].min(k as f64 * step)
                + grid_best(&prices[1..], &demand[1..], units - k, step)
        })
        .fold(f64::MIN, f64::max)
}

fn oracle_matches_grid() -> Check {
    let mut r = rng(1002);
    let step = 0.05;
    let mut worst = 0.0f64;
    for k in 0..50 {
        let t = r.random_range(1..=4);
        let prices: Vec<f64> = (0..t).map(|_| r.random_range(10.0..100.0)).collect();
        let demand: Vec<f64> = (0..t)
            .map(|_| r.random_range(1..80) as f64 * step)
            .collect();
        let units = r.random_range(1..100usize);
        let alloc = oracle_allocation(&prices, &demand, units as f64 * step);
        let greedy: f64 = (0..t).map(|i| prices[i] * demand[i].min(alloc[i])).sum();
        let best = grid_best(&prices, &demand, units, step);
        let gap = (greedy - best).abs();
        worst = worst.max(gap);
        ensure(gap <= 1e-9, || {
            format!("instance {k}: greedy {greedy} vs grid {best}")
        })?;
    }
    Ok(format!("max |greedy - grid| = {worst:.1e}"))
}

fn independence_equivalence() -> Check {
    let mut r = rng(1003);
    let mut worst_alloc = 0.0f64;
    let mut worst_cum = 0.0f64;
    for k in 0..50 {
        let t = r.random_range(2..=40);
        let inst = random_instance(&mut r, t, false);
        let path = PathSampler::new(inst.model()).unwrap().sample(&mut r);
        let s = run_static(&inst, &path, PolicyOptions::default()).map_err(|e| e.to_string())?;
        let q =
            run_sequential(&inst, &path, PolicyOptions::default()).map_err(|e| e.to_string())?;
        for (a, b) in s.alloc.iter().zip(&q.alloc) {
            worst_alloc = worst_alloc.max((a - b).abs());
        }
        for (a, b) in s.cumulative_revenue().iter().zip(q.cumulative_revenue()) {
            worst_cum = worst_cum.max((a - b).abs() / a.abs().max(1.0));
        }
        ensure(worst_alloc <= 1e-6, || {
            format!("trial {k}: allocation gap {worst_alloc:e}")
        })?;
        ensure(worst_cum <= 1e-9, || {
            format!("trial {k}: cumulative revenue gap {worst_cum:e}")
        })?;
    }
    Ok(format!(
        "max allocation gap {worst_alloc:.1e}, max relative cumulative revenue gap {worst_cum:.1e}"
    ))
}

fn horizon_table() -> Check {
    let mut lines = Vec::new();
    for (i, t) in [20usize, 50, 100, 200].into_iter().enumerate() {
        let cfg = SimConfig {
            horizon: t,
            n_trials: 100,
            master_seed: 2000 + i as u64,
            ..Default::default()
        };
        let inst = generate_instance(&cfg, 3000 + i as u64).map_err(|e| e.to_string())?;
        let batch = run_trials(&inst, &cfg).map_err(|e| e.to_string())?;
        ensure(batch.failures.is_empty(), || {
            format!("T={t}: {} failed trials", batch.failures.len())
        })?;
        let rep = aggregate(&batch.records).map_err(|e| e.to_string())?;
        let m = |p| rep.mean(p);
        let (o, q, s, rf) = (
            m(Policy::Oracle),
            m(Policy::Sequential),
            m(Policy::Static),
            m(Policy::RollForward),
        );
        let (seq_ratio, static_ratio) = (q / o, s / o);
        lines.push(format!(
            "T={t} seq/oracle={seq_ratio:.3} static/oracle={static_ratio:.3}"
        ));
        ensure(o > q && q > s && s > rf, || {
            format!(
                "T={t}: ordering broken: oracle {o}, sequential {q}, static {s}, roll-forward {rf}"
            )
        })?;
        ensure(seq_ratio >= 0.93, || {
            format!("T={t}: seq/oracle {seq_ratio:.4}")
        })?;
        ensure(static_ratio <= seq_ratio, || {
            format!("T={t}: static/oracle {static_ratio:.4} > seq/oracle {seq_ratio:.4}")
        })?;
    }
    Ok(lines.join("; "))
}

fn simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(lo + i as f64 * h);
    }
    s * h / 3.0
}

fn expected_min_vs_sampling() -> Check {
    let mut r = rng(1005);
    let n = 1_000_000;
    let mut worst_z = 0.0f64;
    let mut worst_quad = 0.0f64;
    for k in 0..20 {
        let m = random_marginal(&mut r);
        let a = m.quantile(r.random_range(0.02..0.98)).unwrap();
        let (mut mean, mut m2) = (0.0, 0.0);
        for i in 1..=n {
            let z: f64 = r.sample(StandardNormal);
            let v = (m.log_mean() + m.log_std() * z).exp().min(a);
            let d = v - mean;
            mean += d / i as f64;
            m2 += d * (v - mean);
        }
        let se = (m2 / (n - 1) as f64 / n as f64).sqrt();
        let exact = m.expected_min(a);
        let z = (mean - exact).abs() / se;
        worst_z = worst_z.max(z);
        ensure(z <= 3.0, || {
            format!("pair {k}: |MC - closed form| = {z:.2} standard errors")
        })?;

        let quad = simpson(|x| m.survival(x), 0.0, a, 20_000);
        let rel = (quad - exact).abs() / exact;
        worst_quad = worst_quad.max(rel);
        ensure(rel <= 1e-6, || {
            format!("pair {k}: quadrature relative error {rel:e}")
        })?;
    }
    Ok(format!(
        "max {worst_z:.2} standard errors, max quadrature error {worst_quad:.1e}"
    ))
}

fn dense_condition(
    mu: &DVector<f64>,
    sigma: &DMatrix<f64>,
    obs: &[usize],
    x: &[f64],
) -> (DVector<f64>, DMatrix<f64>) {
    let n = mu.len();
    let rem: Vec<usize> = (0..n).filter(|i| !obs.contains(i)).collect();
    let s_oo = DMatrix::from_fn(obs.len(), obs.len(), |a, b| sigma[(obs[a], obs[b])]);
    let s_ro = DMatrix::from_fn(rem.len(), obs.len(), |a, b| sigma[(rem[a], obs[b])]);
    let s_rr = DMatrix::from_fn(rem.len(), rem.len(), |a, b| sigma[(rem[a], rem[b])]);
    let gain = &s_ro * s_oo.try_inverse().unwrap();
    let dev = DVector::from_fn(obs.len(), |a, _| x[a].ln() - mu[obs[a]]);
    let mu_r = DVector::from_fn(rem.len(), |a, _| mu[rem[a]]);
    (mu_r + &gain * dev, s_rr - gain * s_ro.transpose())
}

fn conditioning() -> Check {
    let mut r = rng(1006);
    let mut worst = 0.0f64;
    for k in 0..200 {
        let a = DMatrix::from_fn(5, 5, |_, _| r.random_range(-1.0..1.0));
        let sigma = (&a * a.transpose() + DMatrix::identity(5, 5) * 0.1) * 0.2;
        let mu = DVector::from_fn(5, |_, _| r.random_range(2.0..4.5));
        let model = DemandModel::new(mu.clone(), sigma.clone()).map_err(|e| e.to_string())?;
        let n_obs = r.random_range(1..5);
        let mut idx: Vec<usize> = (0..5).collect();
        for i in 0..n_obs {
            let j = r.random_range(i..5);
            idx.swap(i, j);
        }
        let obs = &idx[..n_obs];
        let x: Vec<f64> = (0..n_obs)
            .map(|_| r.random_range(1.0f64..5.0).exp())
            .collect();
        let observed: Vec<(usize, f64)> = obs.iter().copied().zip(x.iter().copied()).collect();
        let got = condition(&model, &observed).map_err(|e| e.to_string())?;
        let (mu_ref, sigma_ref) = dense_condition(&mu, &sigma, obs, &x);
        let err = (&got.cond_mu - &mu_ref)
            .amax()
            .max((&got.cond_sigma - &sigma_ref).amax());
        worst = worst.max(err);
        ensure(err <= 1e-8, || format!("model {k}: max deviation {err:e}"))?;
    }

    for k in 0..100 {
        let t = r.random_range(2..=8);
        let marginals: Vec<MarginalLogNormal> = (0..t).map(|_| random_marginal(&mut r)).collect();
        let model = DemandModel::independent(&marginals).map_err(|e| e.to_string())?;
        let n_obs = r.random_range(1..t);
        let observed: Vec<(usize, f64)> = (0..n_obs)
            .map(|i| (i, r.random_range(5.0..150.0)))
            .collect();
        let got = condition(&model, &observed).map_err(|e| e.to_string())?;
        for (a, &i) in got.remaining.iter().enumerate() {
            ensure(got.cond_mu[a] == model.mu()[i], || {
                format!("diagonal model {k}: mean moved")
            })?;
            for (b, &j) in got.remaining.iter().enumerate() {
                ensure(got.cond_sigma[(a, b)] == model.sigma()[(i, j)], || {
                    format!("diagonal model {k}: covariance moved")
                })?;
            }
        }
    }
    Ok(format!(
        "max dense-oracle deviation {worst:.1e}; diagonal models unchanged"
    ))
}

fn thread_determinism() -> Check {
    let dir = std::env::temp_dir().join(format!("seqalloc-acceptance-{}", std::process::id()));
    let mut bodies = Vec::new();
    for threads in ["1", "8"] {
        let out = dir.join(format!("threads-{threads}"));
        let status = Command::new(env!("CARGO_BIN_EXE_seqalloc"))
            .args([
                "simulate",
                "--seed",
                "42",
                "--trials",
                "40",
                "--horizon",
                "25",
                "--threads",
                threads,
            ])
            .arg("--out")
            .arg(&out)
            .env_remove("SEQALLOC_THREADS")
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || {
            format!(
                "{threads} threads: {}",
                String::from_utf8_lossy(&status.stderr)
            )
        })?;
        bodies.push(std::fs::read(out.join("trials.csv")).map_err(|e| e.to_string())?);
    }
    let _ = std::fs::remove_dir_all(&dir);
    ensure(bodies[0] == bodies[1], || {
        "trials.csv differs between 1 and 8 threads".into()
    })?;
    Ok(format!("trials.csv identical ({} bytes)", bodies[0].len()))
}

fn roll_forward_plateau() -> Check {
    let cfg = SimConfig {
        horizon: 100,
        n_trials: 100,
        master_seed: 8008,
        ..Default::default()
    };
    let inst = generate_instance(&cfg, 808).map_err(|e| e.to_string())?;
    let sampler = PathSampler::new(inst.model()).map_err(|e| e.to_string())?;
    let mut plateaus = 0;
    for i in 0..cfg.n_trials {
        let path = sampler.sample_indexed(cfg.master_seed, i as u64);
        let res = seqalloc::policies::run_roll_forward(&inst, &path).map_err(|e| e.to_string())?;
        let cum = res.cumulative_revenue();
        let t = cum.len();
        if cum[t - 6..].iter().all(|&c| c == cum[t - 1]) {
            plateaus += 1;
        }
    }
    ensure(plateaus * 2 >= cfg.n_trials, || {
        format!("plateau in {plateaus} of {} trials", cfg.n_trials)
    })?;
    Ok(format!("plateau in {plateaus} of {} trials", cfg.n_trials))
}

fn main() {
    let checks: [Criterion; 8] = [
        (
            "1 static solver feasibility and KKT",
            static_feasibility_and_kkt,
        ),
        ("2 greedy oracle optimality", oracle_matches_grid),
        ("3 independence equivalence", independence_equivalence),
        ("4 policy ordering across horizons", horizon_table),
        ("5 expected_min closed form", expected_min_vs_sampling),
        ("6 conditioning correctness", conditioning),
        ("7 thread-count determinism", thread_determinism),
        ("8 roll-forward plateau", roll_forward_plateau),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{name}] {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{name}] {detail} ({secs:.1}s)");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
