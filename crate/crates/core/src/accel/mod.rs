//! Fixed-point accelerators: Anderson(m, β), CROP(m) and their variants,
//! the shared history window, and convergence diagnostics.
//!
//! Every method works on a [`Problem`](crate::problems::Problem) residual
//! `f(x) = g(x) − x` and stops when the tracked residual 2-norm drops below
//! an absolute tolerance.

mod anderson;
mod crop;
mod diagnostics;
mod multisecant;
mod solve;
mod window;

pub use anderson::{anderson_step, AndersonState, AndersonStep};
pub use crop::{crop_step, crop_step_with_trial, CropState, CropStep, StepResidual};
pub use diagnostics::{
    assumption_m_estimate, cos_theta, estimate_convergence_factors, ConvergenceDiagnostics,
};
pub use multisecant::{
    anderson_explicit_update, approx_inverse_jacobian, crop_explicit_update, JacobianFlavor,
};
pub use solve::{solve, Method, ResidualMode, SolveOptions, SolveReport, SolveStatus, TraceRecord};
pub use window::{Depth, HistoryWindow};

use crate::linalg::LinalgError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AccelError {
    #[error("history window is empty")]
    EmptyWindow,
    #[error("difference columns of the window are rank deficient")]
    SingularWindow,
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("trace of length {0} is too short for rate estimates")]
    DegenerateTrace(usize),
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
