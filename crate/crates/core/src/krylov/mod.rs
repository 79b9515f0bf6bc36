//! Reference Krylov solvers for `A·x = b`: full GMRES, ORTHOMIN(m)
//! (truncated GCR), conjugate residuals and the minimal residual iteration.
//!
//! All solvers record the residual norm and the iterate at every step and
//! stop when `‖b − A·x‖₂ < tol` (absolute).

mod cr;
mod gmres;
mod orthomin;

pub use cr::{cr_solve, minimal_residual_solve};
pub use gmres::gmres_solve;
pub use orthomin::orthomin_solve;

use crate::linalg::{dot, norm2};
use crate::problems::LinearOperator;
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrylovStatus {
    Converged,
    MaxIterations,
    /// The method cannot make progress (zero search direction or Arnoldi
    /// breakdown above the tolerance).
    Stalled,
}

#[derive(Debug, Clone)]
pub struct KrylovTrace {
    pub residual_norms: Vec<f64>,
    pub iterates: Vec<Vec<f64>>,
    pub status: KrylovStatus,
}

impl KrylovTrace {
    fn start(x0: &[f64], r0: f64) -> Self {
        Self {
            residual_norms: vec![r0],
            iterates: vec![x0.to_vec()],
            status: KrylovStatus::MaxIterations,
        }
    }

    fn push(&mut self, x: &[f64], r: f64) {
        self.residual_norms.push(r);
        self.iterates.push(x.to_vec());
    }

    pub fn iterations(&self) -> usize {
        self.residual_norms.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KrylovError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operator failed the symmetry probe")]
    NotSymmetric,
}

fn check_dims(a: &dyn LinearOperator, b: &[f64], x0: &[f64]) -> Result<(), KrylovError> {
    let n = a.dimension();
    for len in [b.len(), x0.len()] {
        if len != n {
            return Err(KrylovError::DimensionMismatch {
                expected: n,
                found: len,
            });
        }
    }
    Ok(())
}

fn residual(a: &dyn LinearOperator, b: &[f64], x: &[f64]) -> Vec<f64> {
    let ax = a.apply(x);
    b.iter().zip(&ax).map(|(b, a)| b - a).collect()
}

const SYMMETRY_PROBES: usize = 5;
const SYMMETRY_RTOL: f64 = 1e-10;

/// Checks `uᵀAv = vᵀAu` on a few seeded random pairs.
pub fn is_symmetric(a: &dyn LinearOperator) -> bool {
    let n = a.dimension();
    let mut rng = SplitMix64::new(0x5EED_5EED);
    (0..SYMMETRY_PROBES).all(|_| {
        let u = rng.uniform_vec(n, -1.0, 1.0);
        let v = rng.uniform_vec(n, -1.0, 1.0);
        let av = a.apply(&v);
        let au = a.apply(&u);
        let scale = norm2(&u) * norm2(&av) + norm2(&v) * norm2(&au);
        (dot(&u, &av) - dot(&v, &au)).abs() <= SYMMETRY_RTOL * scale
    })
}
