//! Optimal sensing-state estimation at the transmitter.
//!
//! For every `(x, z)` the best deterministic estimate minimizes the posterior
//! expected distortion
//!
//! ```text
//! ŝ(x, z) = argmin_ŝ Σ_{s_T} P(s_T | x, z) d(s_T, ŝ)
//! ```
//!
//! and the resulting per-input cost
//! `c(x) = Σ_z P(z | x) Σ_{s_T} P(s_T | x, z) d(s_T, ŝ(x, z))`
//! turns the distortion constraint into a linear constraint on `P_X`.
//!
//! Ties in the argmin go to the lowest reconstruction index. Pairs `(x, z)`
//! that cannot occur get the estimate for the posterior of `S_T` given `z`
//! alone (inputs pooled uniformly), or the prior if `z` is impossible for
//! every input; they never contribute to an expectation.

use crate::channel::{DerivedKernels, DistortionMatrix, IsacChannel};
use crate::prob::Pmf;
use crate::{Error, Result};

/// Estimator `ŝ(x, z)` with its per-input and extreme distortions.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorTable {
    n_x: usize,
    n_z: usize,
    shat: Vec<usize>,
    post_distortion: Vec<f64>,
    reachable: Vec<bool>,
    c: Vec<f64>,
    d_min: f64,
    constant: (usize, f64),
}

impl EstimatorTable {
    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn shat(&self, x: usize, z: usize) -> usize {
        self.shat[x * self.n_z + z]
    }

    /// Posterior expected distortion of `ŝ(x, z)`.
    pub fn posterior_distortion(&self, x: usize, z: usize) -> f64 {
        self.post_distortion[x * self.n_z + z]
    }

    pub fn is_reachable(&self, x: usize, z: usize) -> bool {
        self.reachable[x * self.n_z + z]
    }

    /// Expected distortion `c(x)` when `x` is sent.
    pub fn cost(&self) -> &[f64] {
        &self.c
    }

    /// `min_x c(x)`, the smallest distortion without an input-cost budget.
    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    /// Best estimate that ignores `(x, z)` and its distortion.
    pub fn constant_estimate(&self) -> (usize, f64) {
        self.constant
    }
}

/// Accumulates [`EstimatorTable`] entries one reachable `(x, z)` at a time.
///
/// Used directly by channel builders that never materialize the full
/// posterior table.
#[derive(Debug)]
pub struct EstimatorBuilder<'a> {
    dist: &'a DistortionMatrix,
    prior: &'a Pmf,
    n_x: usize,
    n_z: usize,
    shat: Vec<usize>,
    post_distortion: Vec<f64>,
    reachable: Vec<bool>,
    c: Vec<f64>,
    pooled: Vec<f64>,
}

impl<'a> EstimatorBuilder<'a> {
    pub fn new(n_x: usize, n_z: usize, dist: &'a DistortionMatrix, prior: &'a Pmf) -> Self {
        assert_eq!(prior.len(), dist.n_st(), "prior over S_T does not match distortion rows");
        Self {
            dist,
            prior,
            n_x,
            n_z,
            shat: vec![0; n_x * n_z],
            post_distortion: vec![0.0; n_x * n_z],
            reachable: vec![false; n_x * n_z],
            c: vec![0.0; n_x],
            pooled: vec![0.0; n_z * dist.n_st()],
        }
    }

    /// Records the reachable pair `(x, z)` with `P(z | x) = p_z > 0` and
    /// posterior `P(s_T | x, z)` given on `s_T ∈ start .. start + post.len()`.
    pub fn add(&mut self, x: usize, z: usize, p_z: f64, start: usize, post: &[f64]) {
        debug_assert!(p_z > 0.0);
        let (s, v) = best_estimate(self.dist, start, post);
        let i = x * self.n_z + z;
        self.shat[i] = s;
        self.post_distortion[i] = v;
        self.reachable[i] = true;
        self.c[x] += p_z * v;
        let nt = self.dist.n_st();
        let w = p_z / self.n_x as f64;
        for (k, &p) in post.iter().enumerate() {
            self.pooled[z * nt + start + k] += w * p;
        }
    }

    pub fn finish(mut self) -> EstimatorTable {
        let nt = self.dist.n_st();
        let prior_est = best_estimate(self.dist, 0, self.prior.probs());
        let mut fallback: Vec<Option<(usize, f64)>> = vec![None; self.n_z];
        for i in 0..self.n_x * self.n_z {
            if self.reachable[i] {
                continue;
            }
            let z = i % self.n_z;
            let est = *fallback[z].get_or_insert_with(|| {
                let row = &self.pooled[z * nt..(z + 1) * nt];
                let total: f64 = row.iter().sum();
                if total > 0.0 {
                    let post: Vec<f64> = row.iter().map(|v| v / total).collect();
                    best_estimate(self.dist, 0, &post)
                } else {
                    prior_est
                }
            });
            self.shat[i] = est.0;
            self.post_distortion[i] = est.1;
        }
        let d_max = self.dist.d_max();
        for c in &mut self.c {
            *c = c.clamp(0.0, d_max);
        }
        let d_min = self.c.iter().cloned().fold(f64::INFINITY, f64::min);
        EstimatorTable {
            n_x: self.n_x,
            n_z: self.n_z,
            shat: self.shat,
            post_distortion: self.post_distortion,
            reachable: self.reachable,
            c: self.c,
            d_min,
            constant: prior_est,
        }
    }
}

/// `argmin_ŝ Σ p(t) d(t, ŝ)` for a posterior banded on `start ..`, with ties
/// to the lowest index. Returns the estimate and its expected distortion.
pub(crate) fn best_estimate(dist: &DistortionMatrix, start: usize, post: &[f64]) -> (usize, f64) {
    if let Some((st_labels, shat_labels)) = dist.quadratic_labels() {
        // squared error: the nearest label to the posterior mean wins
        let labels = &st_labels[start..start + post.len()];
        let mean: f64 = post.iter().zip(labels).map(|(p, t)| p * t).sum();
        let k = shat_labels.partition_point(|&v| v < mean);
        let s = if k == 0 {
            0
        } else if k == shat_labels.len() || mean - shat_labels[k - 1] <= shat_labels[k] - mean {
            k - 1
        } else {
            k
        };
        let v = post.iter().zip(labels).map(|(p, t)| p * (t - shat_labels[s]).powi(2)).sum();
        return (s, v);
    }
    let mut best = (0, f64::INFINITY);
    for s in 0..dist.n_shat() {
        let v: f64 = post.iter().enumerate().map(|(k, p)| p * dist.get(start + k, s)).sum();
        if v < best.1 {
            best = (s, v);
        }
    }
    best
}

/// The optimal estimator of a validated channel.
pub fn optimal_estimator(ch: &IsacChannel) -> EstimatorTable {
    optimal_estimator_from_kernels(ch.kernels(), ch.distortion_matrix())
}

pub fn optimal_estimator_from_kernels(k: &DerivedKernels, dist: &DistortionMatrix) -> EstimatorTable {
    let n_x = k.p_z_given_x.n_rows();
    let n_z = k.p_z_given_x.n_out();
    let mut b = EstimatorBuilder::new(n_x, n_z, dist, &k.p_st);
    for x in 0..n_x {
        for (z, p_z) in k.p_z_given_x.row(x).iter() {
            if p_z > 0.0 {
                let row = k.post_st_given_xz.row(x * n_z + z);
                b.add(x, z, p_z, row.start, row.probs);
            }
        }
    }
    b.finish()
}

/// `E[d(S_T, Ŝ_T)] = Σ_x P(x) c(x)`.
pub fn expected_distortion(est: &EstimatorTable, px: &Pmf) -> Result<f64> {
    if px.len() != est.n_x {
        return Err(Error::DimensionMismatch {
            what: "input pmf vs estimator".into(),
            expected: est.n_x,
            found: px.len(),
        });
    }
    Ok(px.probs().iter().zip(&est.c).map(|(p, c)| p * c).sum())
}

/// Best fixed estimate ignoring the echo, and its distortion
/// `min_ŝ Σ P(s_T) d(s_T, ŝ)`.
pub fn constant_estimator_distortion(ch: &IsacChannel) -> (usize, f64) {
    best_estimate(ch.distortion_matrix(), 0, ch.kernels().p_st.probs())
}

/// Smallest achievable distortion `min Σ P(x) c(x)` subject to
/// `Σ P(x) b(x) ≤ budget`, with a minimizing input.
///
/// The minimizer of this linear program sits on at most two symbols, so all
/// feasible symbols and all pairs straddling the budget are enumerated.
pub fn min_distortion(c: &[f64], cost: Option<(&[f64], f64)>) -> Result<(f64, Pmf)> {
    let n = c.len();
    let Some((b, budget)) = cost else {
        let (x, v) = argmin(c);
        return Ok((v, Pmf::point_mass(n, x)));
    };
    let mut best: Option<(f64, Pmf)> = None;
    let mut consider = |v: f64, p: Pmf| {
        if best.as_ref().map_or(true, |(bv, _)| v < *bv) {
            best = Some((v, p));
        }
    };
    for i in (0..n).filter(|&i| b[i] <= budget) {
        consider(c[i], Pmf::point_mass(n, i));
        for j in (0..n).filter(|&j| b[j] > budget) {
            let w = (budget - b[i]) / (b[j] - b[i]);
            let mut probs = vec![0.0; n];
            probs[i] = 1.0 - w;
            probs[j] = w;
            consider((1.0 - w) * c[i] + w * c[j], Pmf::from_normalized(probs));
        }
    }
    best.ok_or_else(|| Error::InvalidConfig(format!("no input symbol has cost within budget {budget}")))
}

fn argmin(v: &[f64]) -> (usize, f64) {
    v.iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &x)| if x < acc.1 { (i, x) } else { acc })
}
