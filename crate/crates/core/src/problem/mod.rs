//! Convex losses `φ` with one-sided derivatives `ψ±`, symmetric kernels `k`,
//! and the jump decomposition of `ψ`.

mod jump;
mod kernel;
mod loss;

pub use jump::{jump_decompose, JumpDecomposition};
pub use kernel::{kernel_catalog, CustomKernel, Kernel, KernelSpec, KERNEL_IDS};
pub use loss::{loss_catalog, CustomLoss, ConvexLoss, LossSpec, Smoothness, StepFunction, LOSS_IDS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("unknown loss `{0}`")]
    UnknownLoss(String),
    #[error("unknown kernel `{0}`")]
    UnknownKernel(String),
    #[error("invalid parameters for `{id}`: {reason}")]
    InvalidParams { id: String, reason: String },
    #[error("kernel `{id}` expects {expected} arguments of dimension {dim}, got {got}")]
    Dimension { id: String, expected: usize, dim: usize, got: String },
    #[error("theil_sen slope undefined: tied regressor values {0}")]
    TiedRegressor(f64),
}

pub(crate) fn bad(id: &str, reason: impl Into<String>) -> ProblemError {
    ProblemError::InvalidParams { id: id.to_string(), reason: reason.into() }
}

/// `|u+v|^r ≤ c_r(|u|^r+|v|^r)` with `c_r = max(1, 2^{r−1})`.
pub fn c_r(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else {
        2f64.powf(r - 1.0)
    }
}
