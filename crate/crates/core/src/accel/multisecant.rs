//! Closed-form (pseudoinverse) versions of the Anderson and CROP updates
//! and the approximate inverse Jacobians they imply.
//!
//! With consecutive differences `𝓧 = [Δx…]` and `𝓕 = [Δf…]` of a window:
//!
//! ```text
//! Anderson:  G_A = −βI + (𝓧 + β𝓕)(𝓕ᵀ𝓕)⁻¹𝓕ᵀ
//! CROP:      G_C = 𝓧(𝓕ᵀ𝓕)⁻¹𝓕ᵀ
//! ```
//!
//! Both satisfy the multisecant condition `G·𝓕 = 𝓧`.

use crate::linalg::{difference_columns, qr_factor, DenseMatrix, RANK_TOL};

use super::window::HistoryWindow;
use super::AccelError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JacobianFlavor {
    Anderson { beta: f64 },
    Crop,
}

/// `(𝓕ᵀ𝓕)⁻¹𝓕ᵀ` for a full-column-rank `f` (computed through QR).
fn pseudo_inverse(f: &DenseMatrix) -> Result<DenseMatrix, AccelError> {
    let m = f.cols();
    if m == 0 {
        return Err(AccelError::SingularWindow);
    }
    let qr = qr_factor(f, RANK_TOL)?;
    if qr.numerical_rank < m {
        return Err(AccelError::SingularWindow);
    }
    // F·P = Q·R  ⇒  F⁺ = P·R⁻¹·Qᵀ.
    let qt = qr.q.transpose();
    let mut z = DenseMatrix::zeros(m, f.rows());
    for c in 0..f.rows() {
        let rhs = qt.col(c);
        let mut y = vec![0.0; m];
        for i in (0..m).rev() {
            let mut s = rhs[i];
            for (j, &yj) in y.iter().enumerate().skip(i + 1) {
                s -= qr.r[(i, j)] * yj;
            }
            y[i] = s / qr.r[(i, i)];
        }
        for (j, &p) in qr.col_perm.iter().enumerate() {
            z[(p, c)] = y[j];
        }
    }
    Ok(z)
}

fn differences(window: &HistoryWindow) -> Result<(DenseMatrix, DenseMatrix), AccelError> {
    if window.len() < 2 {
        return Err(AccelError::SingularWindow);
    }
    Ok((
        difference_columns(&window.iterates())?,
        difference_columns(&window.residuals())?,
    ))
}

/// Dense approximate inverse Jacobian implied by the whole window.
pub fn approx_inverse_jacobian(
    window: &HistoryWindow,
    flavor: JacobianFlavor,
) -> Result<DenseMatrix, AccelError> {
    let (dx, df) = differences(window)?;
    let pinv = pseudo_inverse(&df)?;
    match flavor {
        JacobianFlavor::Crop => Ok(dx.matmul(&pinv)),
        JacobianFlavor::Anderson { beta } => {
            let mut lead = dx.clone();
            for j in 0..lead.cols() {
                for i in 0..lead.rows() {
                    lead[(i, j)] += beta * df[(i, j)];
                }
            }
            let mut g = lead.matmul(&pinv);
            for i in 0..g.rows() {
                g[(i, i)] -= beta;
            }
            Ok(g)
        }
    }
}

/// Anderson update in explicit form:
/// `x_{k+1} = x_k + β·f_k − (𝓧 + β𝓕)·(𝓕ᵀ𝓕)⁻¹𝓕ᵀ·f_k`.
pub fn anderson_explicit_update(window: &HistoryWindow, beta: f64) -> Result<Vec<f64>, AccelError> {
    let (x, f) = window.latest().ok_or(AccelError::EmptyWindow)?;
    let mut out: Vec<f64> = x.iter().zip(f).map(|(x, f)| x + beta * f).collect();
    if window.len() < 2 {
        return Ok(out);
    }
    let (dx, df) = differences(window)?;
    let gamma = pseudo_inverse(&df)?.matvec(f);
    for (j, &g) in gamma.iter().enumerate() {
        for (i, o) in out.iter_mut().enumerate() {
            *o -= g * (dx[(i, j)] + beta * df[(i, j)]);
        }
    }
    Ok(out)
}

/// CROP update in explicit form, for a window whose newest entry is the
/// trial pair `(x̃, f̃)`: `x_next = x̃ − 𝓧·(𝓕ᵀ𝓕)⁻¹𝓕ᵀ·f̃`.
pub fn crop_explicit_update(window: &HistoryWindow) -> Result<Vec<f64>, AccelError> {
    let (x_tilde, f_tilde) = window.latest().ok_or(AccelError::EmptyWindow)?;
    let (dx, df) = differences(window)?;
    let gamma = pseudo_inverse(&df)?.matvec(f_tilde);
    let correction = dx.matvec(&gamma);
    Ok(x_tilde
        .iter()
        .zip(&correction)
        .map(|(a, b)| a - b)
        .collect())
}
