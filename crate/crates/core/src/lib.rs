//! Minimizers of convex U-processes.
//!
//! Given i.i.d. observations, a symmetric kernel `k` of degree `l` and a convex
//! loss `φ`, the estimator is any minimizer of
//! `U_n(t) = C(n,l)⁻¹ Σ φ(t − k(X_{i1},…,X_{il}))`.
//! The crate computes the full minimizer interval exactly, analyses the
//! population problem (location `m`, variance factor `ζ`, attraction class,
//! normalizing sequence `a_n`, limit law `H = Φ_σ∘δ`), and checks the predicted
//! law by seeded Monte Carlo.
//!
//! Module map:
//! - [`population`]: distributions of kernel values and raw observations.
//! - [`problem`]: loss and kernel catalogs, jump decomposition.
//! - [`estimator`]: kernel samples, `V_n±`, `U_n` and the argmin interval.
//! - [`asymptotics`]: population `V`, `m`, `ζ`, classification, limit laws.
//! - [`montecarlo`]: replication harness and KS distances.
//! - [`config`] and [`cli`]: JSON schemas and the command-line front end.

// `!(x > y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cli;
pub mod config;
pub mod estimator;
pub mod montecarlo;
pub mod numeric;
pub mod population;
pub mod problem;
pub mod rng;

pub use asymptotics::{
    AnalysisError, AnalysisSettings, AsymptoticReport, AttractionClass, ClassTag, LimitLaw,
    PopulationProblem,
};
pub use estimator::{argmin_interval, EstimatorError, KernelSample, MinimizerInterval, Policy};
pub use montecarlo::{SimConfig, SimError, SimResult};
pub use population::{Data, Distribution, PopulationError, RawModel};
pub use problem::{ConvexLoss, JumpDecomposition, Kernel, ProblemError, Smoothness};
