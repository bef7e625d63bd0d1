//! Finite approximation of the real Gaussian ISAC channel
//!
//! ```text
//! Y = (S₁ + S₂) X + N,   Z = α S₁ X + N_fb,   S_T = α S₁ + V
//! ```
//!
//! with unit-variance Gaussians `S₁, S₂, N, N_fb, V`, quadratic distortion
//! and the power constraint `E[X²] ≤ P`.
//!
//! Every variable lives on a centered integer lattice: `X` and `S₁, S₂` on
//! step `q`, `N` on `q²`, `N_fb` on `αq²` and `V` on `αq`. Products then land
//! exactly on lattices again (`Y` on `q²`, `Z` on `αq²`, `S_T` on `αq`), so no
//! output is rounded unless re-binning is requested.
//!
//! [`GaussianModel::build`] never forms the `(s₁, s₂) × (y, z)` joint table;
//! [`build_gaussian_isac_channel`] does, producing a generic [`IsacChannel`]
//! for cross-checks at coarse `q`.

use statrs::function::erf::erfc;

use crate::channel::{ChannelLaw, ChannelParts, CommKernels, Csir, Distortion, DistortionMatrix, InputCost, IsacChannel};
use crate::estimator::{min_distortion, EstimatorBuilder, EstimatorTable};
use crate::prob::{Alphabet, CondKernel, JointPmf, Pmf};
use crate::solver::TradeoffProblem;
use crate::{Error, Result};

/// Half-width of the input grid.
pub const X_HALF_WIDTH: f64 = 10.0;
/// Half-width of the state and noise grids.
pub const NOISE_HALF_WIDTH: f64 = 5.0;
/// Environment variable holding the memory ceiling in MiB.
pub const MEMORY_CEILING_ENV: &str = "ISAC_MEMORY_CEILING_MB";
pub const DEFAULT_MEMORY_CEILING_MB: u64 = 4096;

const GRID_SLACK: f64 = 1e-9;

/// Uniform grid `lo, lo + step, …, hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantGrid {
    lo: f64,
    hi: f64,
    step: f64,
    len: usize,
}

impl QuantGrid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::OutOfRange { what: "grid step", value: step });
        }
        if !(hi >= lo && lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidConfig(format!("grid [{lo}, {hi}] is empty")));
        }
        let n = (hi - lo) / step;
        if (n - n.round()).abs() > GRID_SLACK * n.max(1.0) {
            return Err(Error::InvalidConfig(format!(
                "grid [{lo}, {hi}] is not a whole number of steps {step}"
            )));
        }
        Ok(Self {
            lo,
            hi,
            step,
            len: n.round() as usize + 1,
        })
    }

    /// The grid `−K·step, …, K·step` with `K = ⌊half_width / step⌋`.
    pub fn symmetric(half_width: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::OutOfRange { what: "grid step", value: step });
        }
        let k = half_index(half_width, step) as f64;
        Self::new(-k * step, k * step, step)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.point(i)).collect()
    }
}

fn half_index(half_width: f64, step: f64) -> i64 {
    (half_width / step + GRID_SLACK).floor() as i64
}

/// Upper tail `P(N(0,1) > u)`.
fn upper_tail(u: f64) -> f64 {
    0.5 * erfc(u / std::f64::consts::SQRT_2)
}

/// Bin probabilities `Φ((g + step/2)/σ) − Φ((g − step/2)/σ)` of
/// `N(0, σ²)`, renormalized over the grid.
///
/// Both bin edges are evaluated through the tail on the side of `g`, which
/// keeps far-tail bins accurate and makes a symmetric grid give an exactly
/// symmetric pmf.
pub fn quantize_gaussian(sigma: f64, grid: &QuantGrid) -> Result<Pmf> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::OutOfRange { what: "sigma", value: sigma });
    }
    let need = 4.0 * sigma;
    if grid.lo > -need + GRID_SLACK || grid.hi < need - GRID_SLACK {
        return Err(Error::InvalidConfig(format!(
            "grid [{}, {}] does not cover ±4σ = ±{need}",
            grid.lo, grid.hi
        )));
    }
    let h = grid.step / 2.0;
    let raw: Vec<f64> = grid
        .points()
        .iter()
        .map(|&g| {
            let a = g.abs();
            upper_tail((a - h) / sigma) - upper_tail((a + h) / sigma)
        })
        .collect();
    let total: f64 = raw.iter().sum();
    Ok(Pmf::from_normalized(raw.into_iter().map(|p| p / total).collect()))
}

/// What to do with an exact output lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputBinning {
    /// Keep every attainable lattice point.
    #[default]
    Exact,
    /// Merge lattice points into bins `factor` times wider, centered on 0.
    Rebin(u32),
}

impl OutputBinning {
    fn factor(self) -> i64 {
        match self {
            OutputBinning::Exact => 1,
            OutputBinning::Rebin(f) => i64::from(f.max(1)),
        }
    }
}

/// Parameters of the discretized Gaussian example.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianIsacParams {
    /// Reflection coefficient `α > 0`.
    pub alpha: f64,
    /// Power budget `P > 0` on `E[X²]` (linear scale).
    pub power: f64,
    /// Quantization step `q > 0`.
    pub q: f64,
    pub csir: Csir,
    pub y_binning: OutputBinning,
    pub z_binning: OutputBinning,
    /// Overrides the ceiling from [`MEMORY_CEILING_ENV`].
    pub memory_ceiling_mb: Option<u64>,
}

impl GaussianIsacParams {
    pub fn new(alpha: f64, power: f64, q: f64, csir: Csir) -> Self {
        Self {
            alpha,
            power,
            q,
            csir,
            y_binning: OutputBinning::Exact,
            z_binning: OutputBinning::Exact,
            memory_ceiling_mb: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (what, v) in [("alpha", self.alpha), ("power", self.power), ("q", self.q)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::OutOfRange { what, value: v });
            }
        }
        if matches!(self.y_binning, OutputBinning::Rebin(0)) || matches!(self.z_binning, OutputBinning::Rebin(0)) {
            return Err(Error::InvalidConfig("re-binning factor must be at least 1".into()));
        }
        Ok(())
    }

    fn ceiling_mb(&self) -> Result<u64> {
        if let Some(c) = self.memory_ceiling_mb {
            return Ok(c);
        }
        match std::env::var(MEMORY_CEILING_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("{MEMORY_CEILING_ENV}={v:?} is not a whole number of MiB"))),
            Err(_) => Ok(DEFAULT_MEMORY_CEILING_MB),
        }
    }
}

/// Centered integer lattice `−half..=half` with spacing `step`, optionally
/// merged by an integer factor.
#[derive(Debug, Clone, Copy)]
struct Lattice {
    half: i64,
    factor: i64,
    step: f64,
}

/// `a / f` rounded half away from zero.
fn div_round(a: i64, f: i64) -> i64 {
    a.signum() * ((2 * a.abs() + f) / (2 * f))
}

impl Lattice {
    fn binned_half(&self) -> i64 {
        div_round(self.half, self.factor)
    }

    fn len(&self) -> usize {
        (2 * self.binned_half() + 1) as usize
    }

    fn bin(&self, idx: i64) -> usize {
        (div_round(idx, self.factor) + self.binned_half()) as usize
    }

    fn labels(&self) -> Vec<f64> {
        let h = self.binned_half();
        let w = self.step * self.factor as f64;
        (-h..=h).map(|k| k as f64 * w).collect()
    }
}

/// Index ranges and quantized pmfs shared by both builders.
#[derive(Debug, Clone)]
struct Grids {
    kx: i64,
    ks: i64,
    kn: i64,
    kf: i64,
    kv: i64,
    p_s: Pmf,
    p_n: Pmf,
    p_f: Pmf,
    p_v: Pmf,
    y: Lattice,
    z: Lattice,
}

impl Grids {
    fn indices(p: &GaussianIsacParams) -> (i64, i64, i64, i64, i64) {
        let (q, a) = (p.q, p.alpha);
        (
            half_index(X_HALF_WIDTH, q),
            half_index(NOISE_HALF_WIDTH, q),
            half_index(NOISE_HALF_WIDTH, q * q),
            half_index(NOISE_HALF_WIDTH, a * q * q),
            half_index(NOISE_HALF_WIDTH, a * q),
        )
    }

    fn lattices(p: &GaussianIsacParams) -> (Lattice, Lattice) {
        let (kx, ks, kn, kf, _) = Self::indices(p);
        let q2 = p.q * p.q;
        (
            Lattice {
                half: 2 * ks * kx + kn,
                factor: p.y_binning.factor(),
                step: q2,
            },
            Lattice {
                half: ks * kx + kf,
                factor: p.z_binning.factor(),
                step: p.alpha * q2,
            },
        )
    }

    fn new(p: &GaussianIsacParams) -> Result<Self> {
        p.validate()?;
        let (kx, ks, kn, kf, kv) = Self::indices(p);
        if kx == 0 {
            return Err(Error::InvalidConfig(format!("q = {} leaves a single input symbol", p.q)));
        }
        let grid = |step: f64| QuantGrid::symmetric(NOISE_HALF_WIDTH, step);
        let (q, a) = (p.q, p.alpha);
        let (y, z) = Self::lattices(p);
        Ok(Self {
            kx,
            ks,
            kn,
            kf,
            kv,
            p_s: quantize_gaussian(1.0, &grid(q)?)?,
            p_n: quantize_gaussian(1.0, &grid(q * q)?)?,
            p_f: quantize_gaussian(1.0, &grid(a * q * q)?)?,
            p_v: quantize_gaussian(1.0, &grid(a * q)?)?,
            y,
            z,
        })
    }

    fn n_x(&self) -> usize {
        (2 * self.kx + 1) as usize
    }

    fn n_s1(&self) -> usize {
        (2 * self.ks + 1) as usize
    }

    fn n_gain(&self) -> usize {
        (4 * self.ks + 1) as usize
    }

    fn n_st(&self) -> usize {
        (2 * (self.ks + self.kv) + 1) as usize
    }

    /// `P(S₁ + S₂ = u)` for `u = −2K_s ..= 2K_s`.
    fn gain_pmf(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_gain()];
        let ps = self.p_s.probs();
        for (j, a) in ps.iter().enumerate() {
            for (k, b) in ps.iter().enumerate() {
                out[j + k] += a * b;
            }
        }
        out
    }

    fn x_labels(&self, q: f64) -> Vec<f64> {
        (-self.kx..=self.kx).map(|i| i as f64 * q).collect()
    }

    fn st_labels(&self, alpha: f64, q: f64) -> Vec<f64> {
        let h = self.ks + self.kv;
        (-h..=h).map(|t| t as f64 * alpha * q).collect()
    }

    /// Accumulates `weight · P_N(m)` at the output bins of `base + m`.
    fn add_noise_y(&self, acc: &mut [f64], base: i64, weight: f64, span: &mut (usize, usize)) {
        for (m, &pn) in (-self.kn..=self.kn).zip(self.p_n.probs()) {
            let b = self.y.bin(base + m);
            acc[b] += weight * pn;
            span.0 = span.0.min(b);
            span.1 = span.1.max(b + 1);
        }
    }
}

/// Predicted alphabet sizes and memory before anything is materialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeReport {
    pub n_x: usize,
    /// Points of each of the `S₁`, `S₂` grids.
    pub n_s1: usize,
    /// Internal states `(s₁, s₂)`.
    pub n_state_pairs: usize,
    pub n_sr: usize,
    pub n_y: usize,
    pub n_z: usize,
    pub n_st: usize,
    /// Bytes held by [`GaussianModel::build`].
    pub factorized_bytes: u64,
    /// Bytes held by [`build_gaussian_isac_channel`].
    pub full_bytes: u64,
}

fn mib(bytes: u64) -> u64 {
    bytes.div_ceil(1 << 20)
}

impl SizeReport {
    pub fn factorized_mb(&self) -> u64 {
        mib(self.factorized_bytes)
    }

    pub fn full_mb(&self) -> u64 {
        mib(self.full_bytes)
    }
}

/// Alphabet sizes and a memory estimate for both builders.
pub fn estimate_table_sizes(p: &GaussianIsacParams) -> SizeReport {
    let (kx, ks, kn, kf, kv) = Grids::indices(p);
    let (y, z) = Grids::lattices(p);
    let n_x = (2 * kx + 1) as u64;
    let n_s1 = (2 * ks + 1) as u64;
    let n_gain = (4 * ks + 1) as u64;
    let n_st = (2 * (ks + kv) + 1) as u64;
    let (n_y, n_z) = (y.len() as u64, z.len() as u64);
    let n_sr = match p.csir {
        Csir::Perfect => n_gain,
        Csir::None => 1,
    };
    let band = |width: i64, l: &Lattice| ((width / l.factor + 2) as u64).min(l.len() as u64);
    let f64s = 8u64;
    // communication kernel
    let w_entries: u64 = match p.csir {
        Csir::Perfect => n_x * n_gain * band(2 * kn + 1, &y),
        Csir::None => (-kx..=kx).map(|i| band(2 * kn + 4 * ks * i.abs() + 1, &y)).sum(),
    };
    let w_bytes = w_entries * f64s + n_x * n_sr * 16;
    // estimator tables, pooled posteriors and the per-input scratch
    let est_bytes = n_x * n_z * 17 + 2 * n_z * n_st * f64s;
    let factorized_bytes = w_bytes + est_bytes;

    let n_pairs = n_s1 * n_s1;
    let joint = n_pairs * n_st * n_sr * f64s;
    let law = n_x * n_pairs * (band(2 * kn + 1, &y) + band(2 * kf + 1, &z) + 4) * f64s;
    let derived = n_x * n_z * n_st * f64s + n_x * n_pairs * (n_y + n_z) * f64s / n_x.max(1);
    let full_bytes = joint + law + derived + factorized_bytes;
    SizeReport {
        n_x: n_x as usize,
        n_s1: n_s1 as usize,
        n_state_pairs: n_pairs as usize,
        n_sr: n_sr as usize,
        n_y: n_y as usize,
        n_z: n_z as usize,
        n_st: n_st as usize,
        factorized_bytes,
        full_bytes,
    }
}

fn check_ceiling(p: &GaussianIsacParams, bytes: impl Fn(&SizeReport) -> u64) -> Result<()> {
    let ceiling_mb = p.ceiling_mb()?;
    let estimate_mb = mib(bytes(&estimate_table_sizes(p)));
    if estimate_mb <= ceiling_mb {
        return Ok(());
    }
    let mut suggested_q = p.q;
    for _ in 0..16 {
        suggested_q *= 2.0;
        let coarser = GaussianIsacParams {
            q: suggested_q,
            ..p.clone()
        };
        if mib(bytes(&estimate_table_sizes(&coarser))) <= ceiling_mb {
            break;
        }
    }
    Err(Error::MemoryCeiling {
        estimate_mb,
        ceiling_mb,
        suggested_q,
    })
}

/// The discretized Gaussian example in the form the solver consumes.
#[derive(Debug, Clone)]
pub struct GaussianModel {
    params: GaussianIsacParams,
    x_labels: Vec<f64>,
    sr_labels: Vec<f64>,
    y_labels: Vec<f64>,
    z_labels: Vec<f64>,
    st_labels: Vec<f64>,
    cost: Vec<f64>,
    p_st: Pmf,
    comm: CommKernels,
    estimator: EstimatorTable,
}

/// A 2-ary PAM input on the grid and its distortion.
#[derive(Debug, Clone, PartialEq)]
pub struct PamInput {
    pub px: Pmf,
    pub distortion: f64,
    /// `E[X²]` under `px`.
    pub power: f64,
}

impl GaussianModel {
    /// Builds `P(y | x, s_R)` and the optimal estimator without forming the
    /// joint `(s₁, s₂, y, z)` table.
    pub fn build(params: &GaussianIsacParams) -> Result<Self> {
        params.validate()?;
        check_ceiling(params, |r| r.factorized_bytes)?;
        let g = Grids::new(params)?;
        let (q, alpha) = (params.q, params.alpha);
        let x_labels = g.x_labels(q);
        let gain = g.gain_pmf();
        let ny = g.y.len();

        let (p_sr, sr_labels) = match params.csir {
            Csir::Perfect => (
                Pmf::new(gain.clone())?,
                (-2 * g.ks..=2 * g.ks).map(|u| u as f64 * q).collect(),
            ),
            Csir::None => (Pmf::uniform(1), Vec::new()),
        };
        let mut w = CondKernel::builder(ny);
        let mut acc = vec![0.0; ny];
        for i in -g.kx..=g.kx {
            let mut push = |acc: &mut [f64], span: (usize, usize), r: usize| {
                let res = w.push_row(span.0, &acc[span.0..span.1], || format!("P(y|x={},s_R={r})", i as f64 * q));
                acc[span.0..span.1].iter_mut().for_each(|v| *v = 0.0);
                res
            };
            match params.csir {
                Csir::Perfect => {
                    for (r, u) in (-2 * g.ks..=2 * g.ks).enumerate() {
                        let mut span = (ny, 0);
                        g.add_noise_y(&mut acc, u * i, 1.0, &mut span);
                        push(&mut acc, span, r)?;
                    }
                }
                Csir::None => {
                    let mut span = (ny, 0);
                    for (u, &pu) in (-2 * g.ks..=2 * g.ks).zip(&gain) {
                        g.add_noise_y(&mut acc, u * i, pu, &mut span);
                    }
                    push(&mut acc, span, 0)?;
                }
            }
        }
        let comm = CommKernels::new(p_sr, w.finish())?;

        let st_labels = g.st_labels(alpha, q);
        let p_st = Pmf::new(st_marginal(&g))?;
        let dist = DistortionMatrix::quadratic(st_labels.clone(), st_labels.clone())?;
        let estimator = sensing_estimator(&g, &dist, &p_st);

        Ok(Self {
            params: params.clone(),
            cost: x_labels.iter().map(|x| x * x).collect(),
            x_labels,
            sr_labels,
            y_labels: g.y.labels(),
            z_labels: g.z.labels(),
            st_labels,
            p_st,
            comm,
            estimator,
        })
    }

    pub fn params(&self) -> &GaussianIsacParams {
        &self.params
    }

    pub fn x_labels(&self) -> &[f64] {
        &self.x_labels
    }

    /// Channel-gain labels `s₁ + s₂` (empty without CSIR).
    pub fn sr_labels(&self) -> &[f64] {
        &self.sr_labels
    }

    pub fn y_labels(&self) -> &[f64] {
        &self.y_labels
    }

    pub fn z_labels(&self) -> &[f64] {
        &self.z_labels
    }

    pub fn st_labels(&self) -> &[f64] {
        &self.st_labels
    }

    pub fn p_st(&self) -> &Pmf {
        &self.p_st
    }

    /// `b(x) = x²`.
    pub fn input_cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn comm(&self) -> &CommKernels {
        &self.comm
    }

    pub fn estimator(&self) -> &EstimatorTable {
        &self.estimator
    }

    /// Solver input with `E[X²] ≤ P`.
    pub fn problem(&self) -> Result<TradeoffProblem<'_>> {
        TradeoffProblem::new(&self.comm, &self.estimator, Some(&self.cost), Some(self.params.power))
    }

    /// Smallest distortion reachable within the power budget.
    pub fn min_distortion(&self) -> Result<(f64, Pmf)> {
        min_distortion(self.estimator.cost(), Some((&self.cost, self.params.power)))
    }

    /// 2-ary PAM at `±√P`. When `√P` falls between grid points the two
    /// neighbours on each side share the mass so that `E[X²] = P` exactly.
    pub fn pam2(&self) -> Result<PamInput> {
        let amp = self.params.power.sqrt();
        let q = self.params.q;
        let kx = (self.x_labels.len() / 2) as i64;
        let lo = ((amp / q) + GRID_SLACK).floor() as i64;
        if lo > kx || (lo == kx && (amp - kx as f64 * q).abs() > GRID_SLACK) {
            return Err(Error::InvalidConfig(format!("√P = {amp} lies outside the input grid")));
        }
        let (a, b) = (lo as f64 * q, (lo + 1) as f64 * q);
        let w_lo = if (amp - a).abs() <= GRID_SLACK * amp.max(1.0) {
            1.0
        } else {
            (b * b - amp * amp) / (b * b - a * a)
        };
        let mut probs = vec![0.0; self.x_labels.len()];
        for (idx, w) in [(lo, w_lo), (lo + 1, 1.0 - w_lo)] {
            if w > 0.0 {
                probs[(kx + idx) as usize] += w / 2.0;
                probs[(kx - idx) as usize] += w / 2.0;
            }
        }
        let px = Pmf::new(probs)?;
        let dot = |v: &[f64]| px.probs().iter().zip(v).map(|(p, v)| p * v).sum::<f64>();
        Ok(PamInput {
            distortion: dot(self.estimator.cost()),
            power: dot(&self.cost),
            px,
        })
    }
}

/// `P(S_T = t) = Σ_j P₁(j) P_V(t − j)`.
fn st_marginal(g: &Grids) -> Vec<f64> {
    let mut out = vec![0.0; g.n_st()];
    for (j, a) in g.p_s.probs().iter().enumerate() {
        for (v, b) in g.p_v.probs().iter().enumerate() {
            out[j + v] += a * b;
        }
    }
    out
}

/// Optimal estimator from `P(z, s_T | x) = Σ_j P₁(j) P_V(t − j) P_fb(z − j·x)`,
/// one input at a time.
fn sensing_estimator(g: &Grids, dist: &DistortionMatrix, p_st: &Pmf) -> EstimatorTable {
    let (nz, nt) = (g.z.len(), g.n_st());
    let mut builder = EstimatorBuilder::new(g.n_x(), nz, dist, p_st);
    let mut joint = vec![0.0; nz * nt];
    let mut pz = vec![0.0; nz];
    for (xi, i) in (-g.kx..=g.kx).enumerate() {
        joint.iter_mut().for_each(|v| *v = 0.0);
        pz.iter_mut().for_each(|v| *v = 0.0);
        let (mut zlo, mut zhi) = (nz, 0);
        for (jj, (j, &p1)) in (-g.ks..=g.ks).zip(g.p_s.probs()).enumerate() {
            for (m, &pf) in (-g.kf..=g.kf).zip(g.p_f.probs()) {
                let z = g.z.bin(j * i + m);
                zlo = zlo.min(z);
                zhi = zhi.max(z + 1);
                let w = p1 * pf;
                pz[z] += w;
                // t = j + v, indexed from −(K_s + K_v)
                let row = &mut joint[z * nt + jj..z * nt + jj + g.p_v.len()];
                for (o, &pv) in row.iter_mut().zip(g.p_v.probs()) {
                    *o += w * pv;
                }
            }
        }
        let mut post = vec![0.0; nt];
        for z in zlo..zhi {
            let p = pz[z];
            if p <= 0.0 {
                continue;
            }
            let row = &joint[z * nt..(z + 1) * nt];
            let lo = row.iter().position(|&v| v > 0.0).unwrap_or(0);
            let hi = row.iter().rposition(|&v| v > 0.0).map_or(lo, |h| h + 1);
            let total: f64 = row[lo..hi].iter().sum();
            post.clear();
            post.extend(row[lo..hi].iter().map(|v| v / total));
            builder.add(xi, z, p, lo, &post);
        }
    }
    builder.finish()
}

/// The discretized channel as a generic [`IsacChannel`]: the state is the
/// pair `(s₁, s₂)` (unlabeled, row-major in `s₁`), `S_R` is the gain
/// `s₁ + s₂` or nothing, and the law is stored separably.
pub fn build_gaussian_isac_channel(params: &GaussianIsacParams) -> Result<IsacChannel> {
    params.validate()?;
    check_ceiling(params, |r| r.full_bytes)?;
    let g = Grids::new(params)?;
    let (q, alpha) = (params.q, params.alpha);
    let (n1, nt) = (g.n_s1(), g.n_st());
    let ns = n1 * n1;
    let nr = match params.csir {
        Csir::Perfect => g.n_gain(),
        Csir::None => 1,
    };
    let ps = g.p_s.probs();
    let nv = g.p_v.len();
    let mut joint = vec![0.0; ns * nt * nr];
    for j in 0..n1 {
        for k in 0..n1 {
            let s = j * n1 + k;
            let r = if nr == 1 { 0 } else { j + k };
            for (v, &pv) in g.p_v.probs().iter().enumerate() {
                let t = j + v;
                debug_assert!(t < nt && v < nv);
                joint[(s * nt + t) * nr + r] += ps[j] * ps[k] * pv;
            }
        }
    }
    let (ny, nz) = (g.y.len(), g.z.len());
    let mut yk = CondKernel::builder(ny);
    let mut zk = CondKernel::builder(nz);
    let mut acc_y = vec![0.0; ny];
    let mut acc_z = vec![0.0; nz];
    for i in -g.kx..=g.kx {
        for j in -g.ks..=g.ks {
            for k in -g.ks..=g.ks {
                let mut span = (ny, 0);
                g.add_noise_y(&mut acc_y, (j + k) * i, 1.0, &mut span);
                yk.push_row(span.0, &acc_y[span.0..span.1], || format!("P(y|x={i},s=({j},{k}))"))?;
                acc_y[span.0..span.1].iter_mut().for_each(|v| *v = 0.0);

                let (mut lo, mut hi) = (nz, 0);
                for (m, &pf) in (-g.kf..=g.kf).zip(g.p_f.probs()) {
                    let z = g.z.bin(j * i + m);
                    acc_z[z] += pf;
                    lo = lo.min(z);
                    hi = hi.max(z + 1);
                }
                zk.push_row(lo, &acc_z[lo..hi], || format!("P(z|x={i},s=({j},{k}))"))?;
                acc_z[lo..hi].iter_mut().for_each(|v| *v = 0.0);
            }
        }
    }
    let x_labels = g.x_labels(q);
    let st_labels = g.st_labels(alpha, q);
    let sr = match params.csir {
        Csir::Perfect => Alphabet::with_labels((-2 * g.ks..=2 * g.ks).map(|u| u as f64 * q).collect())?,
        Csir::None => Alphabet::new(1)?,
    };
    ChannelParts {
        input_cost: Some(InputCost {
            per_symbol: x_labels.iter().map(|x| x * x).collect(),
            budget: Some(params.power),
        }),
        x: Alphabet::with_labels(x_labels)?,
        s: Alphabet::new(ns)?,
        st: Alphabet::with_labels(st_labels.clone())?,
        shat: Alphabet::with_labels(st_labels)?,
        sr,
        y: Alphabet::with_labels(g.y.labels())?,
        z: Alphabet::with_labels(g.z.labels())?,
        state_joint: JointPmf::new(vec![ns, nt, nr], joint)?,
        channel_law: ChannelLaw::Separable {
            y: yk.finish(),
            z: zk.finish(),
        },
        distortion: Distortion::QuadraticLabels,
    }
    .validate()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(q: f64, csir: Csir) -> GaussianIsacParams {
        GaussianIsacParams::new(0.5, 10.0, q, csir)
    }

    #[test]
    fn quantized_unit_gaussian() {
        let grid = QuantGrid::new(-5.0, 5.0, 1.0).unwrap();
        let p = quantize_gaussian(1.0, &grid).unwrap();
        assert_eq!(p.len(), 11);
        for i in 0..11 {
            assert_eq!(p.get(i), p.get(10 - i));
        }
        // Φ(0.5) − Φ(−0.5) = 0.38292492254802624, renormalized by ≈ 1 − 5.7e-7
        assert!((p.get(5) - 0.382_924_922_548_026_2).abs() < 1e-6);
        assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(quantize_gaussian(1.0, &QuantGrid::new(-3.0, 3.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(QuantGrid::new(-1.0, 1.0, 0.3).is_err());
        assert_eq!(QuantGrid::new(-10.0, 10.0, 0.25).unwrap().len(), 81);
        let g = QuantGrid::symmetric(5.0, 0.375).unwrap();
        assert_eq!(g.len(), 27);
        assert_eq!(g.hi(), 13.0 * 0.375);
    }

    #[test]
    fn lattice_rounding_is_symmetric() {
        for f in 1..5 {
            for a in 0..20 {
                assert_eq!(div_round(-a, f), -div_round(a, f));
            }
        }
        assert_eq!(div_round(1, 2), 1);
        assert_eq!(div_round(3, 3), 1);
        assert_eq!(div_round(4, 3), 1);
        assert_eq!(div_round(5, 3), 2);
    }

    #[test]
    fn size_examples() {
        assert_eq!(estimate_table_sizes(&params(0.125, Csir::Perfect)).n_y, 13441);
        assert_eq!(estimate_table_sizes(&params(1.0, Csir::Perfect)).n_y, 211);
        assert_eq!(estimate_table_sizes(&params(0.5, Csir::Perfect)).n_x, 41);
        let r = estimate_table_sizes(&params(0.25, Csir::Perfect));
        assert_eq!((r.n_x, r.n_s1, r.n_sr, r.n_y, r.n_z, r.n_st), (81, 41, 81, 3361, 1921, 121));
        let r = estimate_table_sizes(&params(1.0, Csir::None));
        assert_eq!((r.n_x, r.n_s1, r.n_state_pairs, r.n_sr), (21, 11, 121, 1));
    }

    #[test]
    fn model_shapes_at_unit_step() {
        let m = GaussianModel::build(&params(1.0, Csir::Perfect)).unwrap();
        assert_eq!(m.x_labels().len(), 21);
        assert_eq!(m.sr_labels().len(), 21);
        assert_eq!(m.sr_labels()[0], -10.0);
        // x = 0 sees pure noise whatever the gain
        let row0 = m.comm().row(10, 0).probs.to_vec();
        for r in 1..21 {
            assert_eq!(m.comm().row(10, r).probs, row0.as_slice());
        }
        let c = m.estimator().cost();
        for i in 0..21 {
            assert!((c[i] - c[20 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn memory_ceiling_suggests_coarser_step() {
        let p = GaussianIsacParams {
            memory_ceiling_mb: Some(1),
            ..params(0.125, Csir::Perfect)
        };
        match GaussianModel::build(&p) {
            Err(Error::MemoryCeiling { suggested_q, ceiling_mb, .. }) => {
                assert_eq!(ceiling_mb, 1);
                assert!(suggested_q >= 0.25);
            }
            other => panic!("expected a ceiling error, got {other:?}"),
        }
    }

    #[test]
    fn invalid_params() {
        assert!(GaussianModel::build(&GaussianIsacParams::new(0.0, 10.0, 1.0, Csir::None)).is_err());
        assert!(GaussianModel::build(&GaussianIsacParams::new(0.5, 10.0, -1.0, Csir::None)).is_err());
        // noise grids narrower than ±4σ
        assert!(GaussianModel::build(&GaussianIsacParams::new(0.5, 10.0, 3.0, Csir::None)).is_err());
    }

    #[test]
    fn pam_matches_power() {
        let m = GaussianModel::build(&params(0.5, Csir::None)).unwrap();
        let pam = m.pam2().unwrap();
        assert!((pam.power - 10.0).abs() < 1e-12);
        let exact = GaussianModel::build(&GaussianIsacParams::new(0.5, 9.0, 0.5, Csir::None)).unwrap();
        let pam = exact.pam2().unwrap();
        assert_eq!(pam.px.probs().iter().filter(|&&p| p > 0.0).count(), 2);
    }
}
