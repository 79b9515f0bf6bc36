//! Dense kernels and the constrained least-squares solver shared by every
//! accelerator.
//!
//! Vectors are plain `Vec<f64>` / `&[f64]`; matrices are column-major
//! [`DenseMatrix`] values. Everything here is a pure function of its inputs.

mod dense;
mod lstsq;
mod qr;

pub use dense::{add, axpy, combine, dot, norm2, scale, sub, DenseMatrix};
pub use lstsq::{
    alpha_to_gamma, difference_columns, gamma_to_alpha, solve_mixing, solve_mixing_columns,
    solve_unconstrained_ls, LstsqPath, MixingCoefficients, MixingSolution,
};
pub use qr::{qr_factor, QrFactorization};

/// Relative threshold on `|R_ii| / |R_00|` below which a column is treated as
/// linearly dependent.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("non-finite entry in input")]
    NonFiniteInput,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty input")]
    Empty,
}
