//! Penalized Blahut-Arimoto iteration for the capacity-distortion tradeoff.
//!
//! For a fixed penalty `μ ≥ 0` the solver maximizes
//!
//! ```text
//! J(P_X, Q) − μ Σ_x P_X(x) c(x)   subject to  Σ_x P_X(x) b(x) ≤ B
//! J(P_X, Q) = Σ_{s_R} P(s_R) Σ_{x,y} P_X(x) P(y|x,s_R) log₂ [Q(x|y,s_R) / P_X(x)]
//! ```
//!
//! by alternating two closed-form steps:
//!
//! 1. `Q(x|y,s_R) ∝ P_X(x) P(y|x,s_R)` (the Bayes posterior, [`q_update`]);
//! 2. `P_X(x) ∝ 2^{g(x)}` with
//!    `g(x) = Σ_{s_R,y} P(s_R) P(y|x,s_R) log₂ Q(x|y,s_R) − λ b(x) − μ c(x)`
//!    ([`g_values`], [`p_update`]), where the input-cost multiplier `λ` is
//!    found by projected dual ascent `λ ← [λ + α_l (Σ P_X b − B)]⁺`
//!    ([`dual_ascent`]).
//!
//! The outer loop stops once `‖P_X^{(k)} − P_X^{(k−1)}‖² ≤ σ₁`. Sweeping `μ`
//! ([`sweep_mu`]) traces the frontier `C(D)`.

use rayon::prelude::*;

use crate::channel::{CommKernels, IsacChannel};
use crate::estimator::{min_distortion, EstimatorTable};
use crate::prob::{conditional_mutual_information, CondKernel, Pmf};
use crate::{Error, Result};

/// Step-size rule `α_l` for the dual update of the input-cost multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    /// `α_l = α₀ / √l`.
    InverseSqrt { alpha0: f64 },
    /// `α_l = α₀ / (2^f · ln 2 · Var_{P^(l)}[b(X)])`, where `f` counts sign
    /// changes of the constraint residual within the inner loop.
    ///
    /// `ln 2 · Var[b]` is the slope of `Σ P_X b` in `λ`, so `α₀ = 1` is a
    /// Newton step on the dual; every overshoot halves it.
    Curvature { alpha0: f64 },
}

impl Default for StepSchedule {
    fn default() -> Self {
        StepSchedule::Curvature { alpha0: 1.0 }
    }
}

/// Solver knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Distortion penalty `μ ≥ 0`.
    pub mu: f64,
    /// Budget `B` on `E[b(X)]`; overrides the channel's own budget.
    pub cost_budget: Option<f64>,
    /// Outer tolerance on `‖ΔP_X‖²`.
    pub sigma1: f64,
    /// Inner tolerance on `|Δλ|`.
    pub sigma2: f64,
    /// Initial multiplier `λ⁽⁰⁾`.
    pub lambda0: f64,
    pub step: StepSchedule,
    pub max_outer: usize,
    pub max_inner: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mu: 0.0,
            cost_budget: None,
            sigma1: 1e-10,
            sigma2: 1e-8,
            lambda0: 0.0,
            step: StepSchedule::default(),
            max_outer: 10_000,
            max_inner: 1_000,
        }
    }
}

impl SolverConfig {
    pub fn with_mu(mu: f64) -> Self {
        Self {
            mu,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return bad(format!("mu = {} must be finite and nonnegative", self.mu));
        }
        if !(self.sigma1 > 0.0 && self.sigma2 > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return bad("iteration caps must be at least 1".into());
        }
        if !(self.lambda0 >= 0.0 && self.lambda0.is_finite()) {
            return bad(format!("lambda0 = {} must be nonnegative", self.lambda0));
        }
        if let Some(b) = self.cost_budget {
            if !(b >= 0.0 && b.is_finite()) {
                return bad(format!("cost budget {b} must be nonnegative"));
            }
        }
        let a0 = match self.step {
            StepSchedule::InverseSqrt { alpha0 } | StepSchedule::Curvature { alpha0 } => alpha0,
        };
        if !(a0 > 0.0 && a0.is_finite()) {
            return bad(format!("step size alpha0 = {a0} must be positive"));
        }
        Ok(())
    }
}

/// Everything the iteration needs from a channel.
#[derive(Debug, Clone)]
pub struct TradeoffProblem<'a> {
    comm: &'a CommKernels,
    estimator: &'a EstimatorTable,
    input_cost: Option<&'a [f64]>,
    budget: Option<f64>,
    /// `Σ_{s_R} P(s_R) Σ_y P(y|x,s_R) log₂ P(y|x,s_R)` per input.
    self_info: Vec<f64>,
    degenerate: bool,
}

impl<'a> TradeoffProblem<'a> {
    pub fn new(
        comm: &'a CommKernels,
        estimator: &'a EstimatorTable,
        input_cost: Option<&'a [f64]>,
        budget: Option<f64>,
    ) -> Result<Self> {
        let nx = comm.n_x();
        if estimator.n_x() != nx {
            return Err(Error::DimensionMismatch {
                what: "estimator inputs vs channel inputs".into(),
                expected: nx,
                found: estimator.n_x(),
            });
        }
        if let Some(b) = input_cost {
            if b.len() != nx {
                return Err(Error::DimensionMismatch {
                    what: "input cost".into(),
                    expected: nx,
                    found: b.len(),
                });
            }
        }
        let nr = comm.n_sr();
        let self_info = (0..nx)
            .map(|x| {
                (0..nr)
                    .filter(|&r| comm.p_sr.get(r) > 0.0)
                    .map(|r| {
                        let s: f64 = comm.row(x, r).probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()).sum();
                        comm.p_sr.get(r) * s
                    })
                    .sum()
            })
            .collect();
        let degenerate = (0..nr).filter(|&r| comm.p_sr.get(r) > 0.0).all(|r| {
            let first = comm.row(0, r);
            (1..nx).all(|x| {
                let row = comm.row(x, r);
                let (lo, hi) = (first.start.min(row.start), first.end().max(row.end()));
                (lo..hi).all(|y| (first.get(y) - row.get(y)).abs() <= 1e-15)
            })
        });
        Ok(Self {
            comm,
            estimator,
            input_cost,
            budget,
            self_info,
            degenerate,
        })
    }

    /// Problem for a validated channel, taking its input cost and budget.
    pub fn from_channel(ch: &'a IsacChannel, estimator: &'a EstimatorTable) -> Result<Self> {
        let cost = ch.input_cost();
        Self::new(
            &ch.kernels().comm,
            estimator,
            cost.map(|c| c.per_symbol.as_slice()),
            cost.and_then(|c| c.budget),
        )
    }

    pub fn comm(&self) -> &CommKernels {
        self.comm
    }

    pub fn estimator(&self) -> &EstimatorTable {
        self.estimator
    }

    pub fn input_cost(&self) -> Option<&[f64]> {
        self.input_cost
    }

    pub fn budget(&self) -> Option<f64> {
        self.budget
    }

    /// True when every input produces the same output law, i.e. `C = 0`.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    fn effective_budget(&self, cfg: &SolverConfig) -> Result<Option<(&'a [f64], f64)>> {
        match (self.input_cost, cfg.cost_budget.or(self.budget)) {
            (Some(b), Some(budget)) => Ok(Some((b, budget))),
            (None, Some(_)) => Err(Error::InvalidConfig("cost budget given but the channel has no input cost".into())),
            (_, None) => Ok(None),
        }
    }
}

/// The Bayes posterior `Q(x | y, s_R)` induced by an input pmf, stored through
/// the input and the output marginals `P(y | s_R)`.
#[derive(Debug, Clone)]
pub struct Posterior {
    px: Pmf,
    n_y: usize,
    output: Vec<f64>,
    log_output: Vec<f64>,
}

impl Posterior {
    pub fn px(&self) -> &Pmf {
        &self.px
    }

    /// `P(y | s_R)` under the input this posterior was built from.
    pub fn output_marginal(&self, r: usize) -> &[f64] {
        &self.output[r * self.n_y..(r + 1) * self.n_y]
    }

    /// `Q(x | y, s_R)`, or `None` where `P(y | s_R) = 0`.
    pub fn q(&self, comm: &CommKernels, x: usize, y: usize, r: usize) -> Option<f64> {
        let m = self.output[r * self.n_y + y];
        (m > 0.0).then(|| self.px.get(x) * comm.row(x, r).get(y) / m)
    }

    /// Materializes `Q` with rows indexed `s_R · |Y| + y`.
    pub fn to_kernel(&self, comm: &CommKernels) -> Result<CondKernel> {
        let nx = comm.n_x();
        let mut b = CondKernel::builder(nx);
        let mut row = vec![0.0; nx];
        for r in 0..comm.n_sr() {
            for y in 0..self.n_y {
                if self.output[r * self.n_y + y] == 0.0 {
                    b.push_undefined();
                    continue;
                }
                for (x, v) in row.iter_mut().enumerate() {
                    *v = self.q(comm, x, y, r).unwrap_or(0.0);
                }
                b.push_row(0, &row, || format!("Q(x|y={y},s_R={r})"))?;
            }
        }
        Ok(b.finish())
    }
}

/// `Q(x|y,s_R) = P(x) P(y|x,s_R) / Σ_{x'} P(x') P(y|x',s_R)`.
pub fn q_update(px: &Pmf, comm: &CommKernels) -> Result<Posterior> {
    let (nx, nr, ny) = (comm.n_x(), comm.n_sr(), comm.n_y());
    if px.len() != nx {
        return Err(Error::DimensionMismatch {
            what: "input pmf vs channel inputs".into(),
            expected: nx,
            found: px.len(),
        });
    }
    let mut output = vec![0.0; nr * ny];
    for r in 0..nr {
        if comm.p_sr.get(r) == 0.0 {
            continue;
        }
        let out = &mut output[r * ny..(r + 1) * ny];
        for x in 0..nx {
            let w = px.get(x);
            if w == 0.0 {
                continue;
            }
            let row = comm.row(x, r);
            for (o, &p) in out[row.start..row.end()].iter_mut().zip(row.probs) {
                *o += w * p;
            }
        }
    }
    let log_output = output.iter().map(|&m| if m > 0.0 { m.log2() } else { 0.0 }).collect();
    Ok(Posterior {
        px: px.clone(),
        n_y: ny,
        output,
        log_output,
    })
}

/// `Σ_{s_R,y} P(s_R) P(y|x,s_R) log₂ Q(x|y,s_R)` per input, expanded as
/// `log₂ P(x) + Σ P W log₂ W − Σ P W log₂ P(y|s_R)` with the middle term
/// precomputed. `−∞` for inputs with `P(x) = 0`.
fn information_term(q: &Posterior, problem: &TradeoffProblem<'_>) -> Vec<f64> {
    let comm = problem.comm;
    let (nx, nr, ny) = (comm.n_x(), comm.n_sr(), comm.n_y());
    (0..nx)
        .map(|x| {
            let p = q.px.get(x);
            if p == 0.0 {
                return f64::NEG_INFINITY;
            }
            let mut cross = 0.0;
            for r in 0..nr {
                let pr = comm.p_sr.get(r);
                if pr == 0.0 {
                    continue;
                }
                let row = comm.row(x, r);
                let logs = &q.log_output[r * ny + row.start..r * ny + row.end()];
                cross += pr * row.probs.iter().zip(logs).map(|(w, l)| w * l).sum::<f64>();
            }
            p.log2() + problem.self_info[x] - cross
        })
        .collect()
}

/// `g(x)` of the input update, evaluated term by term from `Q`.
///
/// Terms with `P(y|x,s_R) = 0` are skipped; an input whose posterior
/// vanishes somewhere its output law does not gets `−∞`. Without a cost
/// vector the `λ` term is omitted.
pub fn g_values(q: &Posterior, comm: &CommKernels, lambda: f64, mu: f64, c: &[f64], b: Option<&[f64]>) -> Result<Vec<f64>> {
    let (nx, nr) = (comm.n_x(), comm.n_sr());
    if c.len() != nx || b.is_some_and(|b| b.len() != nx) || q.px.len() != nx {
        return Err(Error::DimensionMismatch {
            what: "g(x) inputs".into(),
            expected: nx,
            found: c.len(),
        });
    }
    let mut g = vec![0.0; nx];
    for (x, gx) in g.iter_mut().enumerate() {
        let mut acc = 0.0;
        'rows: for r in 0..nr {
            let pr = comm.p_sr.get(r);
            if pr == 0.0 {
                continue;
            }
            for (y, w) in comm.row(x, r).iter() {
                if w == 0.0 {
                    continue;
                }
                match q.q(comm, x, y, r) {
                    Some(qv) if qv > 0.0 => acc += pr * w * qv.log2(),
                    _ => {
                        acc = f64::NEG_INFINITY;
                        break 'rows;
                    }
                }
            }
        }
        *gx = acc - mu * c[x] - b.map_or(0.0, |b| lambda * b[x]);
    }
    Ok(g)
}

/// `P(x) = 2^{g(x)} / Σ_{x'} 2^{g(x')}`, stabilized by subtracting `max g`.
pub fn p_update(g: &[f64]) -> Result<Pmf> {
    let max = g.iter().cloned().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || g.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
        return Err(Error::NoFeasibleSymbol);
    }
    let w: Vec<f64> = g
        .iter()
        .map(|&v| if v == f64::NEG_INFINITY { 0.0 } else { (v - max).exp2() })
        .collect();
    let sum: f64 = w.iter().sum();
    Ok(Pmf::from_normalized(w.into_iter().map(|v| v / sum).collect()))
}

/// Result of the inner multiplier loop.
#[derive(Debug, Clone)]
pub struct DualOutcome {
    /// Input pmf of the closed-form update at `lambda`.
    pub px: Pmf,
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Inner loop for fixed `Q`: alternate the input update and
/// `λ ← [λ + α_l (Σ P b − B)]⁺` until `|Δλ| ≤ σ₂`, starting from `lambda_start`.
pub fn dual_ascent(
    q: &Posterior,
    problem: &TradeoffProblem<'_>,
    cfg: &SolverConfig,
    lambda_start: f64,
) -> Result<DualOutcome> {
    let (b, budget) = problem
        .effective_budget(cfg)?
        .ok_or_else(|| Error::InvalidConfig("dual ascent needs an input cost and a budget".into()))?;
    let info = information_term(q, problem);
    dual_ascent_on(&info, problem.estimator.cost(), b, budget, cfg, lambda_start)
}

fn dual_ascent_on(info: &[f64], c: &[f64], b: &[f64], budget: f64, cfg: &SolverConfig, lambda_start: f64) -> Result<DualOutcome> {
    let update = |lambda: f64| {
        let g: Vec<f64> = info
            .iter()
            .zip(c)
            .zip(b)
            .map(|((h, c), b)| h - lambda * b - cfg.mu * c)
            .collect();
        p_update(&g)
    };
    let mut lambda_prev = lambda_start;
    let mut flips = 0i32;
    let mut last_sign = 0.0;
    let mut px = update(lambda_prev)?;
    for l in 1..=cfg.max_inner {
        let avg: f64 = px.probs().iter().zip(b).map(|(p, b)| p * b).sum();
        let resid = avg - budget;
        let alpha = match cfg.step {
            StepSchedule::InverseSqrt { alpha0 } => alpha0 / (l as f64).sqrt(),
            StepSchedule::Curvature { alpha0 } => {
                let sign = resid.signum();
                if last_sign != 0.0 && sign != last_sign {
                    flips += 1;
                }
                last_sign = sign;
                let var: f64 = px.probs().iter().zip(b).map(|(p, b)| p * (b - avg) * (b - avg)).sum();
                let a = alpha0 / (2f64.powi(flips) * std::f64::consts::LN_2 * var);
                if a.is_finite() {
                    a
                } else {
                    alpha0 / (l as f64).sqrt()
                }
            }
        };
        let lambda = (lambda_prev + alpha * resid).max(0.0);
        if (lambda - lambda_prev).abs() <= cfg.sigma2 {
            if lambda != lambda_prev {
                px = update(lambda)?;
            }
            return Ok(DualOutcome {
                px,
                lambda,
                iterations: l,
                converged: true,
            });
        }
        lambda_prev = lambda;
        px = update(lambda_prev)?;
    }
    Ok(DualOutcome {
        px,
        lambda: lambda_prev,
        iterations: cfg.max_inner,
        converged: false,
    })
}

/// Diagnostics of one outer iteration.
#[derive(Debug, Clone, Copy)]
pub struct OuterStep {
    /// `‖P_X^{(k)} − P_X^{(k−1)}‖²`.
    pub delta_sq: f64,
    pub inner_iterations: usize,
    pub inner_converged: bool,
}

/// The outer alternation as an explicit state machine.
#[derive(Debug)]
pub struct BlahutArimoto<'p, 'a> {
    problem: &'p TradeoffProblem<'a>,
    cfg: SolverConfig,
    cost: Option<(&'a [f64], f64)>,
    px: Pmf,
    lambda: f64,
    iterations: usize,
}

impl<'p, 'a> BlahutArimoto<'p, 'a> {
    /// Starts from the uniform input and `λ⁽⁰⁾`.
    pub fn new(problem: &'p TradeoffProblem<'a>, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let cost = problem.effective_budget(cfg)?;
        Ok(Self {
            problem,
            cfg: cfg.clone(),
            cost,
            px: Pmf::uniform(problem.comm.n_x()),
            lambda: if cost.is_some() { cfg.lambda0 } else { 0.0 },
            iterations: 0,
        })
    }

    pub fn px(&self) -> &Pmf {
        &self.px
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// `Q` update followed by the (possibly trivial) inner multiplier loop.
    pub fn step(&mut self) -> Result<OuterStep> {
        let q = q_update(&self.px, self.problem.comm)?;
        let info = information_term(&q, self.problem);
        let c = self.problem.estimator.cost();
        let (px, inner_iterations, inner_converged) = match self.cost {
            Some((b, budget)) => {
                // warm start from the multiplier of the previous outer iteration
                let out = dual_ascent_on(&info, c, b, budget, &self.cfg, self.lambda)?;
                self.lambda = out.lambda;
                (out.px, out.iterations, out.converged)
            }
            None => {
                let g: Vec<f64> = info.iter().zip(c).map(|(h, c)| h - self.cfg.mu * c).collect();
                (p_update(&g)?, 1, true)
            }
        };
        let delta_sq = px.probs().iter().zip(self.px.probs()).map(|(a, b)| (a - b) * (a - b)).sum();
        self.px = px;
        self.iterations += 1;
        Ok(OuterStep {
            delta_sq,
            inner_iterations,
            inner_converged,
        })
    }

    /// `I(P_X) − μ Σ P_X c − λ Σ P_X b` at the current iterate and multiplier.
    pub fn objective(&self) -> Result<f64> {
        penalized_objective(self.problem, &self.px, self.cfg.mu, self.lambda)
    }
}

/// `I(P_X) − μ Σ P_X c − λ Σ P_X b`, which equals the surrogate
/// `J(P_X, Q) − μ Σ P_X c − λ Σ P_X b` when `Q` is the Bayes posterior.
pub fn penalized_objective(problem: &TradeoffProblem<'_>, px: &Pmf, mu: f64, lambda: f64) -> Result<f64> {
    let i = conditional_mutual_information(px, &problem.comm.p_y_given_x_sr, &problem.comm.p_sr)?;
    let dot = |v: &[f64]| px.probs().iter().zip(v).map(|(p, v)| p * v).sum::<f64>();
    let cost = problem.input_cost.map_or(0.0, |b| lambda * dot(b));
    Ok(i - mu * dot(problem.estimator.cost()) - cost)
}

/// The surrogate `J(P_X, Q)` for an arbitrary posterior `Q`.
pub fn surrogate_objective(px: &Pmf, q: &Posterior, comm: &CommKernels) -> f64 {
    let mut total = 0.0;
    for r in 0..comm.n_sr() {
        let pr = comm.p_sr.get(r);
        if pr == 0.0 {
            continue;
        }
        for x in 0..comm.n_x() {
            let p = px.get(x);
            if p == 0.0 {
                continue;
            }
            for (y, w) in comm.row(x, r).iter() {
                if w > 0.0 {
                    let qv = q.q(comm, x, y, r).unwrap_or(0.0);
                    total += pr * p * w * (qv / p).log2();
                }
            }
        }
    }
    total
}

/// One solved point `(C_μ, D_μ)` of the tradeoff.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffPoint {
    pub mu: f64,
    pub px: Pmf,
    /// `I(X; Y | S_R)` recomputed exactly at `px`.
    pub capacity_bits: f64,
    pub distortion: f64,
    pub avg_cost: Option<f64>,
    pub lambda_star: Option<f64>,
    pub outer_iters: usize,
    pub converged: bool,
}

fn finish_point(problem: &TradeoffProblem<'_>, cfg: &SolverConfig, px: Pmf, lambda: Option<f64>, outer_iters: usize, converged: bool) -> Result<TradeoffPoint> {
    let comm = problem.comm;
    let capacity_bits = conditional_mutual_information(&px, &comm.p_y_given_x_sr, &comm.p_sr)?;
    let distortion = crate::estimator::expected_distortion(problem.estimator, &px)?;
    let avg_cost = problem.input_cost.map(|b| px.probs().iter().zip(b).map(|(p, b)| p * b).sum());
    Ok(TradeoffPoint {
        mu: cfg.mu,
        px,
        capacity_bits,
        distortion,
        avg_cost,
        lambda_star: lambda,
        outer_iters,
        converged,
    })
}

/// Runs the alternation for one `μ` until `‖ΔP_X‖² ≤ σ₁` or `max_outer`.
///
/// A channel with zero capacity returns the distortion-minimizing feasible
/// point mass (lowest index on ties) without iterating.
pub fn solve_penalized(problem: &TradeoffProblem<'_>, cfg: &SolverConfig) -> Result<TradeoffPoint> {
    cfg.validate()?;
    let cost = problem.effective_budget(cfg)?;
    if problem.degenerate {
        let c = problem.estimator.cost();
        let best = (0..c.len())
            .filter(|&x| cost.map_or(true, |(b, budget)| b[x] <= budget))
            .fold(None, |acc: Option<usize>, x| match acc {
                Some(a) if c[a] <= c[x] => Some(a),
                _ => Some(x),
            });
        if let Some(x) = best {
            let px = Pmf::point_mass(c.len(), x);
            return finish_point(problem, cfg, px, cost.map(|_| 0.0), 0, true);
        }
    }
    let mut it = BlahutArimoto::new(problem, cfg)?;
    let mut converged = false;
    while it.iterations() < cfg.max_outer {
        let step = it.step()?;
        if step.delta_sq <= cfg.sigma1 {
            converged = step.inner_converged;
            break;
        }
    }
    let lambda = cost.map(|_| it.lambda());
    let iters = it.iterations();
    finish_point(problem, cfg, it.px, lambda, iters, converged)
}

/// Time-sharing baseline: the chord between pure sensing `(0, D_min)` and
/// pure communication `(C_max, D_const)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsaLine {
    pub d_min: f64,
    pub c_max: f64,
    /// Distortion of the best constant estimate.
    pub d_const: f64,
}

impl TsaLine {
    /// Rate achieved by time sharing at distortion `d`.
    pub fn capacity_at(&self, d: f64) -> f64 {
        if d < self.d_min {
            0.0
        } else if d >= self.d_const || self.d_const <= self.d_min {
            self.c_max
        } else {
            self.c_max * (d - self.d_min) / (self.d_const - self.d_min)
        }
    }

    pub fn endpoints(&self) -> [(f64, f64); 2] {
        [(0.0, self.d_min), (self.c_max, self.d_const)]
    }
}

/// A `μ` sweep: points ordered by distortion, plus the time-sharing baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffCurve {
    pub points: Vec<TradeoffPoint>,
    pub tsa: TsaLine,
}

impl TradeoffCurve {
    pub fn all_converged(&self) -> bool {
        self.points.iter().all(|p| p.converged)
    }
}

/// `{0} ∪` 25 log-spaced values from `10⁻³` to `10²`.
pub fn default_mu_grid() -> Vec<f64> {
    let n = 25;
    std::iter::once(0.0)
        .chain((0..n).map(|i| 10f64.powf(-3.0 + 5.0 * i as f64 / (n - 1) as f64)))
        .collect()
}

/// Solves every `μ` in `mu_grid` (in parallel on the current rayon pool) and
/// attaches the time-sharing line. Output does not depend on thread count.
pub fn sweep_mu(problem: &TradeoffProblem<'_>, mu_grid: &[f64], template: &SolverConfig) -> Result<TradeoffCurve> {
    if mu_grid.is_empty() {
        return Err(Error::InvalidConfig("empty mu grid".into()));
    }
    if let Some(bad) = mu_grid.iter().find(|m| !(**m >= 0.0 && m.is_finite())) {
        return Err(Error::InvalidConfig(format!("mu = {bad} must be finite and nonnegative")));
    }
    let mut points = mu_grid
        .par_iter()
        .map(|&mu| solve_penalized(problem, &SolverConfig { mu, ..template.clone() }))
        .collect::<Result<Vec<_>>>()?;
    let c_max = match points.iter().find(|p| p.mu == 0.0) {
        Some(p) => p.capacity_bits,
        None => solve_penalized(problem, &SolverConfig { mu: 0.0, ..template.clone() })?.capacity_bits,
    };
    let cost = problem.effective_budget(template)?;
    let (d_min, _) = min_distortion(problem.estimator.cost(), cost)?;
    points.sort_by(|a, b| a.distortion.total_cmp(&b.distortion).then(b.mu.total_cmp(&a.mu)));
    Ok(TradeoffCurve {
        points,
        tsa: TsaLine {
            d_min,
            c_max,
            d_const: problem.estimator.constant_estimate().1,
        },
    })
}
