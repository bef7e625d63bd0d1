use super::{ChannelLaw, ChannelParts};
use crate::prob::{CondKernel, Pmf};
use crate::Result;

/// What the communication side of the solver needs: `P(s_R)` and
/// `P(y | x, s_R)` with rows indexed `x · |S_R| + s_R`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommKernels {
    pub p_sr: Pmf,
    /// Rows for `s_R` with `P(s_R) = 0` are undefined.
    pub p_y_given_x_sr: CondKernel,
}

impl CommKernels {
    pub fn new(p_sr: Pmf, p_y_given_x_sr: CondKernel) -> Result<Self> {
        let nr = p_sr.len();
        if p_y_given_x_sr.n_rows() % nr != 0 || p_y_given_x_sr.n_rows() == 0 {
            return Err(crate::Error::DimensionMismatch {
                what: "P(y|x,s_R) rows must be a multiple of |S_R|".into(),
                expected: nr,
                found: p_y_given_x_sr.n_rows(),
            });
        }
        for x in 0..p_y_given_x_sr.n_rows() / nr {
            for r in 0..nr {
                if p_sr.get(r) > 0.0 && !p_y_given_x_sr.is_defined(x * nr + r) {
                    return Err(crate::Error::InvalidChannel(format!(
                        "P(y|x={x},s_R={r}) undefined although P(s_R) > 0"
                    )));
                }
            }
        }
        Ok(Self { p_sr, p_y_given_x_sr })
    }

    pub fn n_x(&self) -> usize {
        self.p_y_given_x_sr.n_rows() / self.p_sr.len()
    }

    pub fn n_sr(&self) -> usize {
        self.p_sr.len()
    }

    pub fn n_y(&self) -> usize {
        self.p_y_given_x_sr.n_out()
    }

    pub fn row(&self, x: usize, r: usize) -> crate::prob::KernelRow<'_> {
        self.p_y_given_x_sr.row(x * self.n_sr() + r)
    }
}

/// Conditional kernels implied by the channel factorization. None of them
/// depends on the input distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedKernels {
    pub comm: CommKernels,
    /// `P(z | x)`, rows indexed by `x`.
    pub p_z_given_x: CondKernel,
    /// `P(s_T | x, z)`, rows indexed `x · |Z| + z`; undefined exactly where
    /// `P(z | x) = 0`.
    pub post_st_given_xz: CondKernel,
    pub p_st: Pmf,
}

/// Computes every derived kernel by summing the joint factorization:
///
/// ```text
/// P(y | x, s_R)   = Σ_s P(s | s_R) Σ_z P(y, z | x, s)
/// P(z | x)        = Σ_s P(s) Σ_y P(y, z | x, s)
/// P(s_T | x, z)   = Σ_s P(s, s_T) P(z | x, s) / P(z | x)
/// ```
pub fn derive_kernels(parts: &ChannelParts) -> Result<DerivedKernels> {
    let (nx, ns, nt, nr) = (parts.x.size(), parts.s.size(), parts.st.size(), parts.sr.size());
    let (ny, nz) = (parts.y.size(), parts.z.size());
    let joint = &parts.state_joint;
    let p_sr = joint.marginalize(&[2])?;
    let p_st = joint.marginalize(&[1])?;
    let p_s = joint.marginalize(&[0])?;
    let p_s_st = joint.marginalize(&[0, 1])?;
    let p_s_sr = joint.marginalize(&[0, 2])?;

    // (s, P(s | s_R)) lists per s_R
    let given_sr: Vec<Vec<(usize, f64)>> = (0..nr)
        .map(|r| {
            let pr = p_sr.get(r);
            (0..ns)
                .filter_map(|s| {
                    let p = p_s_sr.get(s * nr + r);
                    (p > 0.0 && pr > 0.0).then(|| (s, p / pr))
                })
                .collect()
        })
        .collect();
    let st_given_s: Vec<Vec<(usize, f64)>> = (0..ns)
        .map(|s| (0..nt).filter_map(|t| {
            let p = p_s_st.get(s * nt + t);
            (p > 0.0).then_some((t, p))
        }).collect())
        .collect();

    let marginals = LawMarginals::new(&parts.channel_law, ns, ny, nz);

    let mut w = CondKernel::builder(ny);
    let mut acc = vec![0.0; ny];
    for x in 0..nx {
        for (r, list) in given_sr.iter().enumerate() {
            if p_sr.get(r) == 0.0 {
                w.push_undefined();
                continue;
            }
            acc.iter_mut().for_each(|v| *v = 0.0);
            let (mut lo, mut hi) = (ny, 0);
            for &(s, ps) in list {
                let (start, row) = marginals.y_row(x, s);
                lo = lo.min(start);
                hi = hi.max(start + row.len());
                for (k, &p) in row.iter().enumerate() {
                    acc[start + k] += ps * p;
                }
            }
            w.push_row(lo, &acc[lo..hi], || format!("P(y|x={x},s_R={r})"))?;
        }
    }

    let mut pz = CondKernel::builder(nz);
    let mut post = CondKernel::builder(nt);
    let mut zacc = vec![0.0; nz];
    let mut jtz = vec![0.0; nz * nt];
    for x in 0..nx {
        zacc.iter_mut().for_each(|v| *v = 0.0);
        jtz.iter_mut().for_each(|v| *v = 0.0);
        for s in 0..ns {
            let ps = p_s.get(s);
            if ps == 0.0 {
                continue;
            }
            let (start, row) = marginals.z_row(x, s);
            for (k, &p) in row.iter().enumerate() {
                let z = start + k;
                zacc[z] += ps * p;
                for &(t, pst) in &st_given_s[s] {
                    jtz[z * nt + t] += pst * p;
                }
            }
        }
        pz.push_row(0, &zacc, || format!("P(z|x={x})"))?;
        for z in 0..nz {
            let pzx = zacc[z];
            if pzx == 0.0 {
                post.push_undefined();
                continue;
            }
            let row: Vec<f64> = jtz[z * nt..(z + 1) * nt].iter().map(|v| v / pzx).collect();
            post.push_row(0, &row, || format!("P(s_T|x={x},z={z})"))?;
        }
    }

    Ok(DerivedKernels {
        comm: CommKernels::new(p_sr, w.finish())?,
        p_z_given_x: pz.finish(),
        post_st_given_xz: post.finish(),
        p_st,
    })
}

/// Per-row `P(y | x, s)` and `P(z | x, s)`, materialized once for joint laws.
enum LawMarginals<'a> {
    Separable { y: &'a CondKernel, z: &'a CondKernel, ns: usize },
    Joint { y: Vec<Vec<f64>>, z: Vec<Vec<f64>>, ns: usize },
}

impl<'a> LawMarginals<'a> {
    fn new(law: &'a ChannelLaw, ns: usize, ny: usize, nz: usize) -> Self {
        match law {
            ChannelLaw::Separable { y, z } => LawMarginals::Separable { y, z, ns },
            ChannelLaw::Joint(k) => {
                let mut ys = Vec::with_capacity(k.n_rows());
                let mut zs = Vec::with_capacity(k.n_rows());
                for i in 0..k.n_rows() {
                    let mut yrow = vec![0.0; ny];
                    let mut zrow = vec![0.0; nz];
                    for (j, p) in k.row(i).iter() {
                        yrow[j / nz] += p;
                        zrow[j % nz] += p;
                    }
                    ys.push(yrow);
                    zs.push(zrow);
                }
                LawMarginals::Joint { y: ys, z: zs, ns }
            }
        }
    }

    fn y_row(&self, x: usize, s: usize) -> (usize, &[f64]) {
        match self {
            LawMarginals::Separable { y, ns, .. } => {
                let r = y.row(x * ns + s);
                (r.start, r.probs)
            }
            LawMarginals::Joint { y, ns, .. } => (0, &y[x * ns + s]),
        }
    }

    fn z_row(&self, x: usize, s: usize) -> (usize, &[f64]) {
        match self {
            LawMarginals::Separable { z, ns, .. } => {
                let r = z.row(x * ns + s);
                (r.start, r.probs)
            }
            LawMarginals::Joint { z, ns, .. } => (0, &z[x * ns + s]),
        }
    }
}
