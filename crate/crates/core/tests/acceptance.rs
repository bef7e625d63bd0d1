//! Acceptance runner: one line per criterion, nonzero exit if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{brute_cost, brute_kernels, brute_mi, fixed_multiplier_trajectory, random_channel, simplex_grid, Shape};
use isac_core::channel::binary_example;
use isac_core::estimator::optimal_estimator;
use isac_core::gaussian::{GaussianIsacParams, GaussianModel};
use isac_core::io::{parse, serialize};
use isac_core::oracles::{
    binary_curve, gaussian_cmax_perfect_csir, gaussian_distortion_at_gaussian_input, gaussian_dmin, var_st,
};
use isac_core::solver::{default_mu_grid, solve_penalized, sweep_mu};
use isac_core::{Csir, SolverConfig, TradeoffCurve, TradeoffPoint, TradeoffProblem};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

type Outcome = Result<String, String>;

const ALPHA: f64 = 0.5;
const POWER: f64 = 10.0;

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    check((got - want).abs() <= tol, || format!("{name} = {got:.6}, want {want} ± {tol:e}"))
}

fn under(name: &str, elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed < limit, || format!("{name} took {elapsed:.2?}, limit {limit:?}"))
}

fn binary_point(csir: Csir, mu: f64) -> TradeoffPoint {
    let ch = binary_example(csir);
    let est = optimal_estimator(&ch);
    let problem = TradeoffProblem::from_channel(&ch, &est).unwrap();
    solve_penalized(&problem, &SolverConfig::with_mu(mu)).unwrap()
}

fn binary_sweep(csir: Csir, grid: &[f64]) -> TradeoffCurve {
    let ch = binary_example(csir);
    let est = optimal_estimator(&ch);
    let problem = TradeoffProblem::from_channel(&ch, &est).unwrap();
    sweep_mu(&problem, grid, &SolverConfig::default()).unwrap()
}

/// `{0}` and 19 log-spaced values in `[10⁻³, 10²]`.
fn twenty_point_grid() -> Vec<f64> {
    std::iter::once(0.0)
        .chain((0..19).map(|i| 10f64.powf(-3.0 + 5.0 * f64::from(i) / 18.0)))
        .collect()
}

fn binary_extreme(csir: Csir, c: f64, c_tol: f64, d: f64, d_tol: f64) -> Outcome {
    let t = Instant::now();
    let pt = binary_point(csir, 0.0);
    let elapsed = t.elapsed();
    within("C", pt.capacity_bits, c, c_tol)?;
    within("D", pt.distortion, d, d_tol)?;
    under("solve", elapsed, Duration::from_secs(1))?;
    Ok(format!("C = {:.6}, D = {:.6}, {elapsed:.1?}", pt.capacity_bits, pt.distortion))
}

fn binary_sensing_extreme() -> Outcome {
    let mut out = Vec::new();
    for csir in [Csir::None, Csir::Perfect] {
        let pt = binary_point(csir, 1e3);
        within("D", pt.distortion, 0.2, 1e-3)?;
        within("C", pt.capacity_bits, 0.0, 1e-2)?;
        out.push(format!("{csir:?}: ({:.2e}, {:.6})", pt.capacity_bits, pt.distortion));
    }
    Ok(out.join("; "))
}

fn binary_oracle_curve() -> Outcome {
    let t = Instant::now();
    let curves: Vec<_> = [Csir::None, Csir::Perfect].map(|c| (c, binary_sweep(c, &twenty_point_grid()))).into();
    let elapsed = t.elapsed();
    let mut worst = 0.0f64;
    for (csir, curve) in &curves {
        check(curve.points.len() == 20, || format!("{} points", curve.points.len()))?;
        for pt in &curve.points {
            // the point indexes the family through its input law and,
            // independently, through its distortion
            let by_input = binary_curve(pt.px.get(0), *csir).unwrap();
            let by_distortion = binary_curve((pt.distortion / 0.2 - 1.0).clamp(0.0, 1.0), *csir).unwrap();
            let errs = [
                (pt.capacity_bits - by_input.capacity_bits).abs(),
                (pt.distortion - by_input.distortion).abs(),
                (pt.capacity_bits - by_distortion.capacity_bits).abs(),
            ];
            let e = errs.iter().cloned().fold(0.0, f64::max);
            check(e <= 1e-4, || format!("{csir:?} mu = {}: off the curve by {e:.2e}", pt.mu))?;
            worst = worst.max(e);
        }
    }
    under("both sweeps", elapsed, Duration::from_secs(5))?;
    Ok(format!("max deviation {worst:.1e}, {elapsed:.1?}"))
}

/// Nondecreasing and concave as a function of `D`. Points closer than
/// `1e-9` in `D` are merged first; each interior point is then compared with
/// the chord of its neighbours.
fn curve_shape() -> Outcome {
    let mut worst = 0.0f64;
    for csir in [Csir::None, Csir::Perfect] {
        let curve = binary_sweep(csir, &default_mu_grid());
        let mut pts: Vec<(f64, f64)> = Vec::new();
        for p in &curve.points {
            match pts.last_mut() {
                Some(last) if p.distortion - last.0 < 1e-9 => last.1 = last.1.max(p.capacity_bits),
                _ => pts.push((p.distortion, p.capacity_bits)),
            }
        }
        for w in pts.windows(2) {
            check(w[1].1 >= w[0].1 - 1e-6, || format!("{csir:?}: C decreases at D = {}", w[1].0))?;
        }
        for w in pts.windows(3) {
            let ((d0, c0), (d1, c1), (d2, c2)) = (w[0], w[1], w[2]);
            let chord = c0 + (c2 - c0) * (d1 - d0) / (d2 - d0);
            let deficit = chord - c1;
            worst = worst.max(deficit);
            check(deficit <= 1e-6, || format!("{csir:?}: convexity {deficit:.2e} at D = {d1}"))?;
        }
    }
    Ok(format!("max chord excess {worst:.1e}"))
}

fn normal(r: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(r)
}

/// Sample mean and its standard error.
fn monte_carlo(n: usize, seed: u64, mut f: impl FnMut(&mut ChaCha8Rng) -> f64) -> (f64, f64) {
    let mut r = common::rng(seed);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let v = f(&mut r);
        s += v;
        s2 += v * v;
    }
    let mean = s / n as f64;
    let var = (s2 / n as f64 - mean * mean) * n as f64 / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Squared error of the posterior-mean estimate of `S_T = α S₁ + V` from
/// `Z = α S₁ x + N_fb`.
fn sensing_error(r: &mut ChaCha8Rng, x: f64) -> f64 {
    let (s1, nfb, v) = (normal(r), normal(r), normal(r));
    let st = ALPHA * s1 + v;
    let z = ALPHA * s1 * x + nfb;
    let a2x = ALPHA * ALPHA * x;
    let est = a2x * z / (1.0 + a2x * x);
    (st - est).powi(2)
}

fn gaussian_extremes() -> Outcome {
    let t = Instant::now();
    let oracles = [
        ("D_min", gaussian_dmin(ALPHA, POWER).unwrap(), 1.0714),
        ("C_max", gaussian_cmax_perfect_csir(POWER).unwrap(), 1.6128),
        ("D_gauss", gaussian_distortion_at_gaussian_input(ALPHA, POWER).unwrap(), 1.1279),
        ("var_ST", var_st(ALPHA).unwrap(), 1.25),
    ];
    const N: usize = 10_000_000;
    let amp = POWER.sqrt();
    let mc = [
        monte_carlo(N, 11, |r| {
            let x = if r.gen_bool(0.5) { amp } else { -amp };
            sensing_error(r, x)
        }),
        monte_carlo(N, 12, |r| {
            let s = 2f64.sqrt() * normal(r);
            0.5 * (s * s).mul_add(POWER, 1.0).log2()
        }),
        monte_carlo(N, 13, |r| {
            let x = amp * normal(r);
            sensing_error(r, x)
        }),
        monte_carlo(N, 14, |r| {
            let st = ALPHA * normal(r) + normal(r);
            st * st
        }),
    ];
    let elapsed = t.elapsed();
    let mut failures = Vec::new();
    let mut lines = Vec::new();
    for ((name, value, reference), (mean, se)) in oracles.iter().zip(mc) {
        lines.push(format!("{name} {value:.4}"));
        if (value - reference).abs() > 1e-3 {
            failures.push(format!("{name} = {value:.6} vs {reference} (off by {:.1e})", (value - reference).abs()));
        }
        if (value - mean).abs() > 3.0 * se {
            failures.push(format!("{name}: Monte Carlo {mean:.6} ± {se:.1e} disagrees with {value:.6}"));
        }
    }
    if elapsed >= Duration::from_secs(10) {
        failures.push(format!("took {elapsed:.1?}"));
    }
    if failures.is_empty() {
        Ok(format!("{}, {elapsed:.1?}", lines.join(", ")))
    } else {
        Err(format!("{} [{}]", failures.join("; "), lines.join(", ")))
    }
}

fn gaussian_point(q: f64, csir: Csir, mu: f64) -> (TradeoffPoint, GaussianModel) {
    let model = GaussianModel::build(&GaussianIsacParams::new(ALPHA, POWER, q, csir)).unwrap();
    let pt = solve_penalized(&model.problem().unwrap(), &SolverConfig::with_mu(mu)).unwrap();
    (pt, model)
}

fn discretization_consistency() -> Outcome {
    let t = Instant::now();
    let mut pairs = Vec::new();
    let mut pam = Vec::new();
    for q in [1.0, 0.5, 0.25] {
        let (pt, model) = gaussian_point(q, Csir::Perfect, 1.0);
        check(pt.converged, || format!("q = {q} did not converge"))?;
        pairs.push((pt.capacity_bits, pt.distortion));
        pam.push(model.pam2().unwrap().distortion);
    }
    let elapsed = t.elapsed();
    let step = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).hypot(a.1 - b.1);
    let (d1, d2) = (step(pairs[0], pairs[1]), step(pairs[1], pairs[2]));
    check(d2 < d1, || format!("changes {d1:.4} then {d2:.4}"))?;
    let target = 1.0714;
    check((pam[2] - target).abs() / target <= 0.03, || format!("PAM distortion {:.5} at q = 0.25", pam[2]))?;
    under("three solves", elapsed, Duration::from_secs(600))?;
    Ok(format!(
        "(C, D) changes {d1:.4} > {d2:.4}; PAM D {:.5} ({:+.2}%), {elapsed:.1?}",
        pam[2],
        100.0 * (pam[2] - target) / target
    ))
}

fn gaussian_capacity() -> Outcome {
    let (pt, _) = gaussian_point(0.25, Csir::Perfect, 0.0);
    let reference = 1.6128;
    let c = pt.capacity_bits;
    check((c - reference).abs() / reference <= 0.05, || format!("C = {c:.6} is not within 5% of {reference}"))?;
    check(c <= reference + 1e-6, || format!("C = {c:.6} exceeds {reference} by {:.2e}", c - reference))?;
    Ok(format!("C = {c:.6}"))
}

fn tsa_dominance() -> Outcome {
    let mut curves = Vec::new();
    for csir in [Csir::None, Csir::Perfect] {
        curves.push((format!("binary {csir:?}"), binary_sweep(csir, &default_mu_grid())));
        let model = GaussianModel::build(&GaussianIsacParams::new(ALPHA, POWER, 0.5, csir)).unwrap();
        let curve = sweep_mu(&model.problem().unwrap(), &default_mu_grid(), &SolverConfig::default()).unwrap();
        curves.push((format!("gaussian {csir:?}"), curve));
    }
    let mut min_gap = f64::INFINITY;
    let mut skipped = 0;
    for (name, curve) in &curves {
        for pt in &curve.points {
            if !pt.converged {
                skipped += 1;
                continue;
            }
            let gap = pt.capacity_bits - curve.tsa.capacity_at(pt.distortion);
            min_gap = min_gap.min(gap);
            check(gap >= -1e-6, || format!("{name} mu = {}: {gap:.2e} below the line", pt.mu))?;
        }
    }
    Ok(format!("smallest margin {min_gap:.1e}, {skipped} unconverged points skipped"))
}

fn property_suites() -> Outcome {
    // objective monotone at fixed multipliers
    for seed in 0..100u64 {
        let ch = random_channel(seed, Shape { with_cost: true, ..Shape::default() });
        let est = optimal_estimator(&ch);
        let problem = TradeoffProblem::from_channel(&ch, &est).unwrap();
        let mut r = common::rng(seed + 1000);
        let (mu, lambda) = (r.gen_range(0.0..3.0), r.gen_range(0.0..2.0));
        let traj = fixed_multiplier_trajectory(&problem, mu, lambda, 50);
        for w in traj.windows(2) {
            check(w[1] >= w[0] - 1e-12, || format!("seed {seed}: objective {} -> {}", w[0], w[1]))?;
        }
    }

    // estimator against exhaustive search
    for seed in 0..100u64 {
        let ch = random_channel(seed + 200, Shape::default());
        let est = optimal_estimator(&ch);
        let b = brute_kernels(&ch);
        for (x, cx) in brute_cost(&ch, &b).into_iter().enumerate() {
            check((est.cost()[x] - cx).abs() < 1e-12, || format!("seed {seed}: c({x}) {} vs {cx}", est.cost()[x]))?;
        }
    }

    // solver against simplex grid search, with and without a budget
    let mut worst = 0.0f64;
    for seed in 0..60u64 {
        let with_cost = seed % 2 == 1;
        let ch = random_channel(seed + 400, Shape { with_cost, ..Shape::default() });
        let est = optimal_estimator(&ch);
        let problem = TradeoffProblem::from_channel(&ch, &est).unwrap();
        let mu = common::rng(seed + 500).gen_range(0.0..2.0);
        let pt = solve_penalized(&problem, &SolverConfig::with_mu(mu)).unwrap();
        let solver = pt.capacity_bits - mu * pt.distortion;
        let b = brute_kernels(&ch);
        let c = est.cost();
        let nx = c.len();
        let n = if nx == 2 { 1000 } else { 200 };
        let grid = simplex_grid(nx, n)
            .into_iter()
            .filter(|p| match (problem.input_cost(), problem.budget()) {
                (Some(cost), Some(budget)) => p.iter().zip(cost).map(|(a, b)| a * b).sum::<f64>() <= budget,
                _ => true,
            })
            .map(|p| brute_mi(&b, &p) - mu * p.iter().zip(c).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        let gap = (solver - grid).abs();
        worst = worst.max(gap);
        check(gap <= 2e-3, || format!("seed {seed}: solver {solver:.6} vs grid {grid:.6}"))?;
    }

    for seed in 0..100u64 {
        let ch = random_channel(seed + 700, Shape { with_cost: seed % 2 == 0, ..Shape::default() });
        let doc = serialize(&ch);
        let back = parse(&doc).map_err(|e| format!("seed {seed}: {e}"))?;
        check(back == ch && serialize(&back) == doc, || format!("seed {seed}: round trip differs"))?;
    }
    Ok(format!("monotone, argmin, grid gap ≤ {worst:.1e}, round trip"))
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("binary perfect CSIR extreme", || binary_extreme(Csir::Perfect, 0.6, 1e-3, 0.3, 1e-3)),
        ("binary no CSIR extreme", || binary_extreme(Csir::None, 0.4068, 1e-3, 0.3181, 2e-3)),
        ("binary sensing extreme", binary_sensing_extreme),
        ("binary oracle curve", binary_oracle_curve),
        ("binary curve shape", curve_shape),
        ("gaussian extremes", gaussian_extremes),
        ("discretization consistency", discretization_consistency),
        ("gaussian capacity q=0.25", gaussian_capacity),
        ("tsa dominance", tsa_dominance),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("{failed} of 10 criteria failed");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
