//! Random small channels and brute-force reference computations shared by the
//! property tests and the acceptance runner. Nothing here calls the derived
//! kernels or the estimator of the library; everything is summed from the
//! channel ingredients directly.

#![allow(dead_code)]

use isac_core::prob::Alphabet;
use isac_core::solver::{g_values, p_update, penalized_objective, q_update, TradeoffProblem};
use isac_core::{ChannelLaw, ChannelParts, CondKernel, Distortion, InputCost, IsacChannel, JointPmf, Pmf};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Weights with roughly a third of the entries zeroed, never all zero.
fn sparse_weights(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.05..1.0) })
        .collect();
    if w.iter().all(|&v| v == 0.0) {
        w[rng.gen_range(0..n)] = 1.0;
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

fn labels(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut v = rng.gen_range(-2.0..0.0);
    (0..n)
        .map(|_| {
            v += rng.gen_range(0.1..1.5);
            v
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_x: usize,
    pub max_other: usize,
    pub with_cost: bool,
}

impl Default for Shape {
    fn default() -> Self {
        Self {
            max_x: 3,
            max_other: 3,
            with_cost: false,
        }
    }
}

/// A random valid channel. Every alphabet has at least one symbol; laws may
/// be joint or separable and distortions Hamming, tabulated or quadratic.
pub fn random_channel(seed: u64, shape: Shape) -> IsacChannel {
    let mut r = rng(seed);
    let m = shape.max_other;
    let nx = r.gen_range(2..=shape.max_x.max(2));
    let (ns, nt, nr, ny, nz) = (
        r.gen_range(1..=m),
        r.gen_range(1..=m),
        r.gen_range(1..=m.min(2)),
        r.gen_range(2..=m.max(2)),
        r.gen_range(1..=m),
    );
    let joint = sparse_weights(&mut r, ns * nt * nr);
    let law = if r.gen_bool(0.5) {
        let rows: Vec<Vec<f64>> = (0..nx * ns).map(|_| sparse_weights(&mut r, ny * nz)).collect();
        ChannelLaw::Joint(CondKernel::from_dense_rows(ny * nz, &rows).unwrap())
    } else {
        let yr: Vec<Vec<f64>> = (0..nx * ns).map(|_| sparse_weights(&mut r, ny)).collect();
        let zr: Vec<Vec<f64>> = (0..nx * ns).map(|_| sparse_weights(&mut r, nz)).collect();
        ChannelLaw::Separable {
            y: CondKernel::from_dense_rows(ny, &yr).unwrap(),
            z: CondKernel::from_dense_rows(nz, &zr).unwrap(),
        }
    };
    let (st, shat, distortion) = match r.gen_range(0..3) {
        0 => (Alphabet::new(nt).unwrap(), Alphabet::new(nt).unwrap(), Distortion::Hamming),
        1 => {
            let nsh = r.gen_range(1..=m);
            let table = (0..nt * nsh).map(|_| r.gen_range(0.0..2.0)).collect();
            (Alphabet::new(nt).unwrap(), Alphabet::new(nsh).unwrap(), Distortion::Table(table))
        }
        _ => {
            let nsh = r.gen_range(1..=m);
            (
                Alphabet::with_labels(labels(&mut r, nt)).unwrap(),
                Alphabet::with_labels(labels(&mut r, nsh)).unwrap(),
                Distortion::QuadraticLabels,
            )
        }
    };
    let input_cost = shape.with_cost.then(|| {
        let per_symbol: Vec<f64> = (0..nx).map(|_| r.gen_range(0.0..2.0)).collect();
        let lo = per_symbol.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = per_symbol.iter().cloned().fold(0.0, f64::max);
        InputCost {
            budget: Some(lo + r.gen_range(0.1..1.0) * (hi - lo)),
            per_symbol,
        }
    });
    let labelled = |r: &mut ChaCha8Rng, n: usize| {
        if r.gen_bool(0.3) {
            Alphabet::with_labels(labels(r, n)).unwrap()
        } else {
            Alphabet::new(n).unwrap()
        }
    };
    ChannelParts {
        x: labelled(&mut r, nx),
        s: Alphabet::new(ns).unwrap(),
        st,
        shat,
        sr: Alphabet::new(nr).unwrap(),
        y: Alphabet::new(ny).unwrap(),
        z: Alphabet::new(nz).unwrap(),
        state_joint: JointPmf::new(vec![ns, nt, nr], joint).unwrap(),
        channel_law: law,
        distortion,
        input_cost,
    }
    .validate()
    .unwrap()
}

/// `P(y, z | x, s)` read straight from the law.
pub fn law(p: &ChannelParts, x: usize, s: usize, y: usize, z: usize) -> f64 {
    let (ns, nz) = (p.s.size(), p.z.size());
    match &p.channel_law {
        ChannelLaw::Joint(k) => k.prob(x * ns + s, y * nz + z),
        ChannelLaw::Separable { y: ky, z: kz } => ky.prob(x * ns + s, y) * kz.prob(x * ns + s, z),
    }
}

pub fn dist(p: &ChannelParts, t: usize, shat: usize) -> f64 {
    match &p.distortion {
        Distortion::Hamming => f64::from(u8::from(t != shat)),
        Distortion::Table(v) => v[t * p.shat.size() + shat],
        Distortion::QuadraticLabels => {
            let a = p.st.labels().unwrap()[t];
            let b = p.shat.labels().unwrap()[shat];
            (a - b) * (a - b)
        }
    }
}

/// Kernels summed by brute force over the full factorization.
pub struct BruteKernels {
    pub p_sr: Vec<f64>,
    /// `[x][r][y]`, zero rows where `P(r) = 0`.
    pub w: Vec<Vec<Vec<f64>>>,
    /// `[x][z][t]` joint `P(z, t | x)`.
    pub zt: Vec<Vec<Vec<f64>>>,
}

pub fn brute_kernels(ch: &IsacChannel) -> BruteKernels {
    let p = ch.parts();
    let (nx, ns, nt, nr, ny, nz) = (p.x.size(), p.s.size(), p.st.size(), p.sr.size(), p.y.size(), p.z.size());
    let joint = |s, t, r| p.state_joint.get(&[s, t, r]);
    let mut p_sr = vec![0.0; nr];
    for s in 0..ns {
        for t in 0..nt {
            for (r, acc) in p_sr.iter_mut().enumerate() {
                *acc += joint(s, t, r);
            }
        }
    }
    let mut w = vec![vec![vec![0.0; ny]; nr]; nx];
    let mut zt = vec![vec![vec![0.0; nt]; nz]; nx];
    for x in 0..nx {
        for s in 0..ns {
            for t in 0..nt {
                for r in 0..nr {
                    let pj = joint(s, t, r);
                    if pj == 0.0 {
                        continue;
                    }
                    for y in 0..ny {
                        for z in 0..nz {
                            let l = pj * law(p, x, s, y, z);
                            w[x][r][y] += l / p_sr[r];
                            zt[x][z][t] += l;
                        }
                    }
                }
            }
        }
    }
    BruteKernels { p_sr, w, zt }
}

/// `c(x) = Σ_z min_ŝ Σ_t P(z, t | x) d(t, ŝ)`.
pub fn brute_cost(ch: &IsacChannel, k: &BruteKernels) -> Vec<f64> {
    let p = ch.parts();
    k.zt
        .iter()
        .map(|per_z| {
            per_z
                .iter()
                .map(|row| {
                    (0..p.shat.size())
                        .map(|sh| row.iter().enumerate().map(|(t, v)| v * dist(p, t, sh)).sum::<f64>())
                        .fold(f64::INFINITY, f64::min)
                })
                .sum()
        })
        .collect()
}

/// `I(X; Y | S_R)` in bits from the brute-force kernel.
pub fn brute_mi(k: &BruteKernels, px: &[f64]) -> f64 {
    let mut total = 0.0;
    for (r, &pr) in k.p_sr.iter().enumerate() {
        if pr == 0.0 {
            continue;
        }
        let ny = k.w[0][r].len();
        let out: Vec<f64> = (0..ny).map(|y| px.iter().enumerate().map(|(x, p)| p * k.w[x][r][y]).sum()).collect();
        for (x, &p) in px.iter().enumerate() {
            for y in 0..ny {
                let w = k.w[x][r][y];
                if p > 0.0 && w > 0.0 {
                    total += pr * p * w * (w / out[y]).log2();
                }
            }
        }
    }
    total
}

/// Runs `iters` input updates at a fixed multiplier and penalty and returns
/// the objective after each one, starting from the uniform input.
pub fn fixed_multiplier_trajectory(problem: &TradeoffProblem<'_>, mu: f64, lambda: f64, iters: usize) -> Vec<f64> {
    let nx = problem.comm().n_x();
    let c = problem.estimator().cost().to_vec();
    let mut px = Pmf::uniform(nx);
    let mut out = vec![penalized_objective(problem, &px, mu, lambda).unwrap()];
    for _ in 0..iters {
        let q = q_update(&px, problem.comm()).unwrap();
        let g = g_values(&q, problem.comm(), lambda, mu, &c, problem.input_cost()).unwrap();
        px = p_update(&g).unwrap();
        out.push(penalized_objective(problem, &px, mu, lambda).unwrap());
    }
    out
}

/// Compositions of `n` into `parts` nonnegative integers.
pub fn simplex_grid(parts: usize, n: usize) -> Vec<Vec<f64>> {
    fn rec(parts: usize, left: usize, n: usize, cur: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
        if parts == 1 {
            cur.push(left as f64 / n as f64);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k as f64 / n as f64);
            rec(parts - 1, left - k, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(parts, n, n, &mut Vec::new(), &mut out);
    out
}
