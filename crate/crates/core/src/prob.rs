//! Finite-alphabet probability primitives.
//!
//! All information quantities are in bits. Terms of the form `0 · log 0` are
//! taken as zero and skipped before the logarithm is evaluated.

use crate::{Error, Result};

/// Absolute tolerance on `Σ p = 1` accepted by every constructor.
pub const PROB_TOL: f64 = 1e-9;

/// Sums closer to one than this are treated as already normalized and kept
/// bit-for-bit, so that renormalization is idempotent.
const ROUNDING_TOL: f64 = 1e-12;

/// A finite alphabet, optionally carrying one physical value per symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct Alphabet {
    size: usize,
    labels: Option<Vec<f64>>,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidAlphabet("alphabet must be nonempty".into()));
        }
        Ok(Self { size, labels: None })
    }

    /// Alphabet whose symbols carry the given labels, which must be finite and
    /// strictly increasing.
    pub fn with_labels(labels: Vec<f64>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidAlphabet("alphabet must be nonempty".into()));
        }
        if let Some(bad) = labels.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidAlphabet(format!("non-finite label {bad}")));
        }
        if let Some(w) = labels.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidAlphabet(format!(
                "labels not strictly increasing: {} then {}",
                w[0], w[1]
            )));
        }
        Ok(Self {
            size: labels.len(),
            labels: Some(labels),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[f64]> {
        self.labels.as_deref()
    }

    pub fn label(&self, i: usize) -> Option<f64> {
        self.labels.as_ref().map(|l| l[i])
    }
}

/// Checks a row of nonnegative weights against `Σ = 1` and renormalizes it in
/// place when it is off by more than rounding but less than `tol`.
pub(crate) fn normalize_in_place(values: &mut [f64], tol: f64) -> std::result::Result<(), RowIssue> {
    for &v in values.iter() {
        if !v.is_finite() || v < 0.0 {
            return Err(RowIssue::Entry(v));
        }
    }
    let sum: f64 = values.iter().sum();
    let err = (sum - 1.0).abs();
    if err > tol {
        return Err(RowIssue::Sum(sum));
    }
    if err > ROUNDING_TOL {
        values.iter_mut().for_each(|v| *v /= sum);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum RowIssue {
    Entry(f64),
    Sum(f64),
}

impl RowIssue {
    pub(crate) fn into_error(self, row: impl FnOnce() -> String) -> Error {
        match self {
            RowIssue::Entry(value) => Error::InvalidEntry { what: row(), value },
            RowIssue::Sum(sum) => Error::NotStochastic { row: row(), sum },
        }
    }
}

/// A probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    /// Validates `probs` (entries ≥ 0, sum within [`PROB_TOL`] of one).
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Degenerate("empty pmf".into()));
        }
        normalize_in_place(&mut probs, PROB_TOL).map_err(|e| e.into_error(|| "pmf".into()))?;
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform pmf over an empty alphabet");
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(n: usize, at: usize) -> Self {
        assert!(at < n, "point mass index {at} outside alphabet of size {n}");
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Self { probs }
    }

    /// Caller guarantees the entries already form a pmf.
    pub(crate) fn from_normalized(probs: Vec<f64>) -> Self {
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> f64 {
        -self.probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()).sum::<f64>()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }
}

/// Scales a nonnegative sequence to sum to one.
pub fn normalize(raw: &[f64]) -> Result<Pmf> {
    if let Some(&bad) = raw.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidEntry {
            what: "weights to normalize".into(),
            value: bad,
        });
    }
    let sum: f64 = raw.iter().sum();
    if sum <= 0.0 {
        return Err(Error::Degenerate("all weights are zero".into()));
    }
    Ok(Pmf {
        probs: raw.iter().map(|v| v / sum).collect(),
    })
}

/// A pmf over a product alphabet, stored flat in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    dims: Vec<usize>,
    pmf: Pmf,
}

impl JointPmf {
    pub fn new(dims: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if dims.is_empty() || n == 0 {
            return Err(Error::Degenerate("product alphabet is empty".into()));
        }
        if probs.len() != n {
            return Err(Error::DimensionMismatch {
                what: "joint pmf entries".into(),
                expected: n,
                found: probs.len(),
            });
        }
        Ok(Self {
            dims,
            pmf: Pmf::new(probs)?,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn pmf(&self) -> &Pmf {
        &self.pmf
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        idx.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| {
            debug_assert!(i < d);
            acc * d + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.pmf.get(self.flat_index(idx))
    }

    /// Sums out every axis not in `keep`; the result is laid out row-major over
    /// the kept axes in the order given.
    pub fn marginalize(&self, keep: &[usize]) -> Result<Pmf> {
        marginalize(self, keep)
    }
}

/// Marginal of `joint` over the axes in `keep`.
pub fn marginalize(joint: &JointPmf, keep: &[usize]) -> Result<Pmf> {
    let rank = joint.dims.len();
    for (i, &a) in keep.iter().enumerate() {
        if a >= rank {
            return Err(Error::OutOfRange {
                what: "marginalization axis",
                value: a as f64,
            });
        }
        if keep[..i].contains(&a) {
            return Err(Error::InvalidConfig(format!("axis {a} kept twice")));
        }
    }
    let out_len: usize = keep.iter().map(|&a| joint.dims[a]).product();
    let mut out = vec![0.0; out_len];
    let mut idx = vec![0usize; rank];
    for &p in joint.pmf.probs() {
        let o = keep.iter().fold(0, |acc, &a| acc * joint.dims[a] + idx[a]);
        out[o] += p;
        // odometer increment, last axis fastest
        for ax in (0..rank).rev() {
            idx[ax] += 1;
            if idx[ax] < joint.dims[ax] {
                break;
            }
            idx[ax] = 0;
        }
    }
    Ok(Pmf::from_normalized(out))
}

/// One row of a [`CondKernel`]: probabilities for outputs
/// `start .. start + probs.len()`, zero elsewhere.
#[derive(Debug, Clone, Copy)]
pub struct KernelRow<'a> {
    pub start: usize,
    pub probs: &'a [f64],
}

impl KernelRow<'_> {
    pub fn end(&self) -> usize {
        self.start + self.probs.len()
    }

    pub fn get(&self, j: usize) -> f64 {
        if j < self.start || j >= self.end() {
            0.0
        } else {
            self.probs[j - self.start]
        }
    }

    /// `(output index, probability)` pairs over the stored band.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs.iter().enumerate().map(move |(k, &p)| (self.start + k, p))
    }
}

/// A row-stochastic table with banded storage: each row keeps only the span
/// between its first and last nonzero entry.
///
/// A row may be *undefined* (empty band) when its conditioning event has
/// probability zero; every defined row is a valid pmf.
#[derive(Debug, Clone, PartialEq)]
pub struct CondKernel {
    n_out: usize,
    starts: Vec<usize>,
    offsets: Vec<usize>,
    values: Vec<f64>,
}

impl CondKernel {
    pub fn builder(n_out: usize) -> KernelBuilder {
        KernelBuilder {
            kernel: CondKernel {
                n_out,
                starts: Vec::new(),
                offsets: vec![0],
                values: Vec::new(),
            },
        }
    }

    /// Kernel from fully dense rows.
    pub fn from_dense_rows(n_out: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut b = Self::builder(n_out);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_out {
                return Err(Error::DimensionMismatch {
                    what: format!("kernel row {i}"),
                    expected: n_out,
                    found: row.len(),
                });
            }
            b.push_row(0, row, || format!("{i}"))?;
        }
        Ok(b.finish())
    }

    pub fn n_rows(&self) -> usize {
        self.starts.len()
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn row(&self, i: usize) -> KernelRow<'_> {
        KernelRow {
            start: self.starts[i],
            probs: &self.values[self.offsets[i]..self.offsets[i + 1]],
        }
    }

    pub fn is_defined(&self, i: usize) -> bool {
        self.offsets[i + 1] > self.offsets[i]
    }

    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.row(i).get(j)
    }

    /// Number of stored entries across all bands.
    pub fn stored_len(&self) -> usize {
        self.values.len()
    }

    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_out];
        for (j, p) in self.row(i).iter() {
            out[j] = p;
        }
        out
    }
}

/// Incremental [`CondKernel`] construction with per-row validation.
#[derive(Debug)]
pub struct KernelBuilder {
    kernel: CondKernel,
}

impl KernelBuilder {
    /// Appends a row whose entries `probs` cover outputs `start ..`. Leading and
    /// trailing zeros are trimmed; `label` names the row in error messages.
    pub fn push_row(&mut self, start: usize, probs: &[f64], label: impl FnOnce() -> String) -> Result<()> {
        if start + probs.len() > self.kernel.n_out {
            return Err(Error::DimensionMismatch {
                what: format!("row {}", label()),
                expected: self.kernel.n_out,
                found: start + probs.len(),
            });
        }
        let first = probs.iter().position(|&p| p != 0.0);
        let last = probs.iter().rposition(|&p| p != 0.0);
        let (lo, hi) = match (first, last) {
            (Some(a), Some(b)) => (a, b + 1),
            _ => return Err(RowIssue::Sum(0.0).into_error(label)),
        };
        let at = self.kernel.values.len();
        self.kernel.values.extend_from_slice(&probs[lo..hi]);
        if let Err(issue) = normalize_in_place(&mut self.kernel.values[at..], PROB_TOL) {
            self.kernel.values.truncate(at);
            return Err(issue.into_error(label));
        }
        self.kernel.starts.push(start + lo);
        self.kernel.offsets.push(self.kernel.values.len());
        Ok(())
    }

    /// Appends a row for a zero-probability conditioning event.
    pub fn push_undefined(&mut self) {
        self.kernel.starts.push(0);
        self.kernel.offsets.push(self.kernel.values.len());
    }

    pub fn reserve(&mut self, rows: usize, entries: usize) {
        self.kernel.starts.reserve(rows);
        self.kernel.offsets.reserve(rows);
        self.kernel.values.reserve(entries);
    }

    pub fn finish(self) -> CondKernel {
        self.kernel
    }
}

/// `H₂(p)` in bits.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange { what: "probability", value: p });
    }
    let h = |v: f64| if v > 0.0 { -v * v.log2() } else { 0.0 };
    Ok(h(p) + h(1.0 - p))
}

/// `I(X; Y | S_R)` in bits for input `px`, channel `P(y | x, s_R)` with rows
/// indexed `x · |S_R| + s_R`, and side-information pmf `p_sr`.
///
/// No side information is the case `|S_R| = 1`. Rows for `s_R` with
/// `P(s_R) = 0` are ignored and may be undefined.
pub fn conditional_mutual_information(px: &Pmf, p_y_given_x_sr: &CondKernel, p_sr: &Pmf) -> Result<f64> {
    let (nx, nr) = (px.len(), p_sr.len());
    if p_y_given_x_sr.n_rows() != nx * nr {
        return Err(Error::DimensionMismatch {
            what: "P(y|x,s_R) rows vs |X|·|S_R|".into(),
            expected: nx * nr,
            found: p_y_given_x_sr.n_rows(),
        });
    }
    let mut out_marginal = vec![0.0; p_y_given_x_sr.n_out()];
    let mut total = 0.0;
    for r in 0..nr {
        let pr = p_sr.get(r);
        if pr == 0.0 {
            continue;
        }
        out_marginal.iter_mut().for_each(|v| *v = 0.0);
        for x in 0..nx {
            let i = x * nr + r;
            if !p_y_given_x_sr.is_defined(i) {
                return Err(Error::InvalidChannel(format!(
                    "P(y|x={x},s_R={r}) undefined although P(s_R) > 0"
                )));
            }
            let w = px.get(x);
            if w == 0.0 {
                continue;
            }
            for (y, p) in p_y_given_x_sr.row(i).iter() {
                out_marginal[y] += w * p;
            }
        }
        let mut inner = 0.0;
        for x in 0..nx {
            let w = px.get(x);
            if w == 0.0 {
                continue;
            }
            let row = p_y_given_x_sr.row(x * nr + r);
            let s: f64 = row
                .iter()
                .filter(|&(_, p)| p > 0.0)
                .map(|(y, p)| p * (p / out_marginal[y]).log2())
                .sum();
            inner += w * s;
        }
        total += pr * inner;
    }
    Ok(total.max(0.0))
}
