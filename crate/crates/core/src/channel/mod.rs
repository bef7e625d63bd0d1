//! The ISAC channel model.
//!
//! A channel is the factorization
//!
//! ```text
//! P_X(x) · P(s, s_T, s_R) · P(y, z | x, s) · P(ŝ_T | x, z)
//! ```
//!
//! where everything but `P_X` and the estimator is fixed by the channel. The
//! transmitter chooses `P_X`, the estimator follows from the channel alone
//! (see [`crate::estimator`]). No receiver CSI is a side-information alphabet
//! of size one, so a single code path covers every CSIR case.

mod binary;
mod kernels;

pub use binary::binary_example;
pub use kernels::{derive_kernels, CommKernels, DerivedKernels};

use crate::prob::{Alphabet, CondKernel, JointPmf};
use crate::{Error, Result};

/// Receiver channel-state information in the built-in examples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Csir {
    /// `S_R = ∅`.
    None,
    /// `S_R = S` (or a sufficient statistic of `S` for the decoder).
    Perfect,
}

impl Csir {
    pub fn as_str(self) -> &'static str {
        match self {
            Csir::None => "none",
            Csir::Perfect => "perfect",
        }
    }
}

impl std::str::FromStr for Csir {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Csir::None),
            "perfect" => Ok(Csir::Perfect),
            other => Err(Error::InvalidConfig(format!("unknown CSIR mode '{other}'"))),
        }
    }
}

/// `P(y, z | x, s)`, rows indexed `x · |S| + s`.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelLaw {
    /// Outputs flattened as `y · |Z| + z`.
    Joint(CondKernel),
    /// `P(y, z | x, s) = P(y | x, s) · P(z | x, s)`.
    Separable { y: CondKernel, z: CondKernel },
}

impl ChannelLaw {
    /// Joint law from a function `(x, s, y, z) -> probability` over dense
    /// alphabets. Rows are checked as they are built.
    pub fn joint_from_fn(
        nx: usize,
        ns: usize,
        ny: usize,
        nz: usize,
        f: impl Fn(usize, usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut b = CondKernel::builder(ny * nz);
        let mut row = vec![0.0; ny * nz];
        for x in 0..nx {
            for s in 0..ns {
                for y in 0..ny {
                    for z in 0..nz {
                        row[y * nz + z] = f(x, s, y, z);
                    }
                }
                b.push_row(0, &row, || format!("(x={x},s={s})"))?;
            }
        }
        Ok(ChannelLaw::Joint(b.finish()))
    }
}

/// Distortion measure `d(s_T, ŝ_T)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Distortion {
    /// `1{s_T ≠ ŝ_T}` on symbol indices.
    Hamming,
    /// `(label(s_T) − label(ŝ_T))²`; both alphabets must carry labels.
    QuadraticLabels,
    /// Dense table, row-major `s_T · |Ŝ_T| + ŝ_T`.
    Table(Vec<f64>),
}

/// Materialized distortion table. Keeps the labels when the measure is
/// quadratic so the estimator can use the posterior-mean shortcut.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionMatrix {
    n_st: usize,
    n_shat: usize,
    values: Vec<f64>,
    quadratic: Option<(Vec<f64>, Vec<f64>)>,
}

impl DistortionMatrix {
    pub fn build(d: &Distortion, st: &Alphabet, shat: &Alphabet) -> Result<Self> {
        let (n_st, n_shat) = (st.size(), shat.size());
        let mut quadratic = None;
        let values = match d {
            Distortion::Hamming => (0..n_st * n_shat)
                .map(|i| if i / n_shat == i % n_shat { 0.0 } else { 1.0 })
                .collect(),
            Distortion::QuadraticLabels => {
                let (a, b) = match (st.labels(), shat.labels()) {
                    (Some(a), Some(b)) => (a.to_vec(), b.to_vec()),
                    _ => {
                        return Err(Error::InvalidChannel(
                            "quadratic-labels distortion needs labels on s_T and ŝ_T".into(),
                        ))
                    }
                };
                let v = a.iter().flat_map(|&t| b.iter().map(move |&s| (t - s) * (t - s))).collect();
                quadratic = Some((a, b));
                v
            }
            Distortion::Table(v) => {
                if v.len() != n_st * n_shat {
                    return Err(Error::DimensionMismatch {
                        what: "distortion table".into(),
                        expected: n_st * n_shat,
                        found: v.len(),
                    });
                }
                if let Some((i, &bad)) = v.iter().enumerate().find(|(_, d)| !d.is_finite() || **d < 0.0) {
                    return Err(Error::InvalidEntry {
                        what: format!("distortion (s_T={}, ŝ_T={})", i / n_shat, i % n_shat),
                        value: bad,
                    });
                }
                v.clone()
            }
        };
        Ok(Self {
            n_st,
            n_shat,
            values,
            quadratic,
        })
    }

    /// Quadratic distortion over the given labels.
    pub fn quadratic(st_labels: Vec<f64>, shat_labels: Vec<f64>) -> Result<Self> {
        Self::build(
            &Distortion::QuadraticLabels,
            &Alphabet::with_labels(st_labels)?,
            &Alphabet::with_labels(shat_labels)?,
        )
    }

    pub fn n_st(&self) -> usize {
        self.n_st
    }

    pub fn n_shat(&self) -> usize {
        self.n_shat
    }

    pub fn get(&self, st: usize, shat: usize) -> f64 {
        self.values[st * self.n_shat + shat]
    }

    pub fn d_max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    pub(crate) fn quadratic_labels(&self) -> Option<(&[f64], &[f64])> {
        self.quadratic.as_ref().map(|(a, b)| (a.as_slice(), b.as_slice()))
    }
}

/// Per-symbol input cost `b(x)` and an optional budget `B` on `E[b(X)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputCost {
    pub per_symbol: Vec<f64>,
    pub budget: Option<f64>,
}

/// Unvalidated channel ingredients. [`ChannelParts::validate`] turns them into
/// an [`IsacChannel`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParts {
    pub x: Alphabet,
    pub s: Alphabet,
    pub st: Alphabet,
    pub shat: Alphabet,
    pub sr: Alphabet,
    pub y: Alphabet,
    pub z: Alphabet,
    /// `P(s, s_T, s_R)` with dims `[|S|, |S_T|, |S_R|]`.
    pub state_joint: JointPmf,
    pub channel_law: ChannelLaw,
    pub distortion: Distortion,
    pub input_cost: Option<InputCost>,
}

impl ChannelParts {
    pub fn validate(self) -> Result<IsacChannel> {
        let (nx, ns) = (self.x.size(), self.s.size());
        let (ny, nz) = (self.y.size(), self.z.size());
        let want = [ns, self.st.size(), self.sr.size()];
        if self.state_joint.dims() != want {
            return Err(Error::InvalidChannel(format!(
                "state_joint dims {:?}, expected {:?} (|S|, |S_T|, |S_R|)",
                self.state_joint.dims(),
                want
            )));
        }
        let check_kernel = |k: &CondKernel, what: &str, n_out: usize| -> Result<()> {
            if k.n_rows() != nx * ns {
                return Err(Error::DimensionMismatch {
                    what: format!("{what} rows (|X|·|S|)"),
                    expected: nx * ns,
                    found: k.n_rows(),
                });
            }
            if k.n_out() != n_out {
                return Err(Error::DimensionMismatch {
                    what: format!("{what} outputs"),
                    expected: n_out,
                    found: k.n_out(),
                });
            }
            if let Some(i) = (0..k.n_rows()).find(|&i| !k.is_defined(i)) {
                return Err(Error::NotStochastic {
                    row: format!("(x={},s={}) of {what}", i / ns, i % ns),
                    sum: 0.0,
                });
            }
            Ok(())
        };
        match &self.channel_law {
            ChannelLaw::Joint(k) => check_kernel(k, "channel_law", ny * nz)?,
            ChannelLaw::Separable { y, z } => {
                check_kernel(y, "channel_law.y", ny)?;
                check_kernel(z, "channel_law.z", nz)?;
            }
        }
        let distortion = DistortionMatrix::build(&self.distortion, &self.st, &self.shat)?;
        if let Some(cost) = &self.input_cost {
            if cost.per_symbol.len() != nx {
                return Err(Error::DimensionMismatch {
                    what: "input_cost".into(),
                    expected: nx,
                    found: cost.per_symbol.len(),
                });
            }
            if let Some((x, &b)) = cost.per_symbol.iter().enumerate().find(|(_, b)| !b.is_finite() || **b < 0.0) {
                return Err(Error::InvalidEntry {
                    what: format!("input_cost b(x={x})"),
                    value: b,
                });
            }
            if let Some(b) = cost.budget {
                if !b.is_finite() || b < 0.0 {
                    return Err(Error::InvalidEntry {
                        what: "input_cost budget".into(),
                        value: b,
                    });
                }
            }
        }
        let kernels = derive_kernels(&self)?;
        Ok(IsacChannel {
            d_max: distortion.d_max(),
            parts: self,
            distortion,
            kernels,
        })
    }
}

/// A validated channel with its derived kernels cached. Immutable.
#[derive(Debug, Clone)]
pub struct IsacChannel {
    parts: ChannelParts,
    distortion: DistortionMatrix,
    d_max: f64,
    kernels: DerivedKernels,
}

impl PartialEq for IsacChannel {
    fn eq(&self, other: &Self) -> bool {
        self.parts == other.parts
    }
}

impl IsacChannel {
    pub fn parts(&self) -> &ChannelParts {
        &self.parts
    }

    pub fn into_parts(self) -> ChannelParts {
        self.parts
    }

    pub fn kernels(&self) -> &DerivedKernels {
        &self.kernels
    }

    pub fn distortion_matrix(&self) -> &DistortionMatrix {
        &self.distortion
    }

    /// Largest distortion value; finite by validation.
    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    pub fn input_cost(&self) -> Option<&InputCost> {
        self.parts.input_cost.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_parts() -> ChannelParts {
        // X, S, S_T, Y, Z binary; Y = X xor S, Z = S
        let law = ChannelLaw::joint_from_fn(2, 2, 2, 2, |x, s, y, z| ((y == (x ^ s)) && z == s) as u8 as f64).unwrap();
        ChannelParts {
            x: Alphabet::new(2).unwrap(),
            s: Alphabet::new(2).unwrap(),
            st: Alphabet::new(2).unwrap(),
            shat: Alphabet::new(2).unwrap(),
            sr: Alphabet::new(1).unwrap(),
            y: Alphabet::new(2).unwrap(),
            z: Alphabet::new(2).unwrap(),
            state_joint: JointPmf::new(vec![2, 2, 1], vec![0.45, 0.05, 0.05, 0.45]).unwrap(),
            channel_law: law,
            distortion: Distortion::Hamming,
            input_cost: None,
        }
    }

    #[test]
    fn valid_channel_passes() {
        let ch = tiny_parts().validate().unwrap();
        assert_eq!(ch.d_max(), 1.0);
    }

    #[test]
    fn non_stochastic_row_is_named() {
        let err = ChannelLaw::joint_from_fn(2, 2, 1, 1, |x, s, _, _| if x == 0 && s == 1 { 0.9 } else { 1.0 })
            .unwrap_err();
        assert!(err.to_string().contains("row (x=0,s=1) not stochastic"), "{err}");
    }

    #[test]
    fn negative_distortion_rejected() {
        let mut p = tiny_parts();
        p.distortion = Distortion::Table(vec![0.0, 1.0, -1.0, 0.0]);
        assert!(matches!(p.validate(), Err(Error::InvalidEntry { .. })));
        let mut p = tiny_parts();
        p.distortion = Distortion::Table(vec![0.0, f64::INFINITY, 1.0, 0.0]);
        assert!(p.validate().is_err());
    }

    #[test]
    fn dimension_errors() {
        let mut p = tiny_parts();
        p.sr = Alphabet::new(2).unwrap();
        assert!(matches!(p.validate(), Err(Error::InvalidChannel(_))));
        let mut p = tiny_parts();
        p.input_cost = Some(InputCost {
            per_symbol: vec![1.0],
            budget: None,
        });
        assert!(matches!(p.validate(), Err(Error::DimensionMismatch { .. })));
        let mut p = tiny_parts();
        p.distortion = Distortion::QuadraticLabels;
        assert!(p.validate().is_err());
    }

    #[test]
    fn csir_parses() {
        assert_eq!("none".parse::<Csir>().unwrap(), Csir::None);
        assert_eq!("perfect".parse::<Csir>().unwrap(), Csir::Perfect);
        assert!("partial".parse::<Csir>().is_err());
    }
}
