//! Capacity-distortion tradeoff of integrated sensing-and-communication (ISAC)
//! channels.
//!
//! The model is a state-dependent memoryless channel `P(y, z | x, s)` whose
//! transmitter observes an echo `Z` and estimates a sensing state `S_T` that is
//! correlated with, but not equal to, the channel state `S`. The receiver sees
//! side information `S_R` (nothing, partial or perfect CSI). The best rate at
//! sensing distortion `D` is
//!
//! ```text
//! C(D) = max { I(X; Y | S_R) : E[d(S_T, Ŝ_T)] <= D, E[b(X)] <= B }
//! ```
//!
//! and is traced by a penalized Blahut-Arimoto iteration ([`solver`]) swept over
//! the penalty weight `μ`.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`prob`] | pmfs, banded conditional kernels, entropy, conditional mutual information |
//! | [`channel`] | the [`IsacChannel`] model, validation, derived kernels, the binary example |
//! | [`estimator`] | the optimal deterministic state estimator and per-input distortion `c(x)` |
//! | [`solver`] | alternating maximization with distortion penalty and input-cost dual ascent |
//! | [`oracles`] | closed-form curves and extreme points used as ground truth |
//! | [`gaussian`] | grid discretization of the real Gaussian ISAC channel |
//! | [`io`] | the text channel file format and curve CSV |
//!
//! ```
//! use isac_core::{channel::binary_example, Csir, estimator::optimal_estimator};
//! use isac_core::solver::{solve_penalized, SolverConfig, TradeoffProblem};
//!
//! let ch = binary_example(Csir::Perfect);
//! let est = optimal_estimator(&ch);
//! let problem = TradeoffProblem::from_channel(&ch, &est).unwrap();
//! let point = solve_penalized(&problem, &SolverConfig::default()).unwrap();
//! assert!((point.capacity_bits - 0.6).abs() < 1e-6);
//! assert!((point.distortion - 0.3).abs() < 1e-6);
//! ```

pub mod channel;
mod error;
pub mod estimator;
pub mod gaussian;
pub mod io;
pub mod oracles;
pub mod prob;
pub mod solver;

pub use channel::{ChannelLaw, ChannelParts, Csir, DerivedKernels, Distortion, InputCost, IsacChannel};
pub use error::{Error, Result};
pub use estimator::EstimatorTable;
pub use prob::{Alphabet, CondKernel, JointPmf, Pmf};
pub use solver::{SolverConfig, StepSchedule, TradeoffCurve, TradeoffPoint, TradeoffProblem, TsaLine};
