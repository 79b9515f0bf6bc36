use crate::linalg::{axpy, dot, norm2};
use crate::problems::LinearOperator;

use super::{check_dims, residual, KrylovError, KrylovStatus, KrylovTrace};

/// Full (unrestarted) GMRES: Arnoldi with modified Gram–Schmidt, the
/// Hessenberg least-squares problem reduced by Givens rotations.
pub fn gmres_solve(
    a: &dyn LinearOperator,
    b: &[f64],
    x0: &[f64],
    tol: f64,
    maxit: usize,
) -> Result<(Vec<f64>, KrylovTrace), KrylovError> {
    check_dims(a, b, x0)?;
    let r0 = residual(a, b, x0);
    let beta = norm2(&r0);
    let mut trace = KrylovTrace::start(x0, beta);
    if beta < tol {
        trace.status = KrylovStatus::Converged;
        return Ok((x0.to_vec(), trace));
    }

    let mut basis: Vec<Vec<f64>> = vec![r0.iter().map(|v| v / beta).collect()];
    // Columns of the rotated Hessenberg matrix (upper triangular part).
    let mut rcols: Vec<Vec<f64>> = Vec::new();
    let mut rotations: Vec<(f64, f64)> = Vec::new();
    let mut g = vec![beta];
    let mut x = x0.to_vec();

    for j in 0..maxit {
        let mut w = a.apply(&basis[j]);
        let mut h = Vec::with_capacity(j + 2);
        for v in &basis {
            let hij = dot(&w, v);
            axpy(-hij, v, &mut w);
            h.push(hij);
        }
        let h_next = norm2(&w);
        h.push(h_next);

        for (i, &(c, s)) in rotations.iter().enumerate() {
            let (p, q) = (h[i], h[i + 1]);
            h[i] = c * p + s * q;
            h[i + 1] = -s * p + c * q;
        }
        let (p, q) = (h[j], h[j + 1]);
        let d = p.hypot(q);
        let (c, s) = if d == 0.0 { (1.0, 0.0) } else { (p / d, q / d) };
        h[j] = d;
        h[j + 1] = 0.0;
        rotations.push((c, s));
        g.push(-s * g[j]);
        g[j] *= c;
        h.truncate(j + 1);
        rcols.push(h);

        x = x0.to_vec();
        for (i, yi) in back_substitute(&rcols, &g).iter().enumerate() {
            axpy(*yi, &basis[i], &mut x);
        }
        let res = g[j + 1].abs();
        trace.push(&x, res);

        if res < tol {
            trace.status = KrylovStatus::Converged;
            return Ok((x, trace));
        }
        if h_next <= f64::EPSILON * beta * 1e-2 || d == 0.0 {
            trace.status = KrylovStatus::Stalled;
            return Ok((x, trace));
        }
        basis.push(w.iter().map(|v| v / h_next).collect());
    }
    Ok((x, trace))
}

/// Solves the upper-triangular system stored column-wise in `rcols`.
fn back_substitute(rcols: &[Vec<f64>], g: &[f64]) -> Vec<f64> {
    let k = rcols.len();
    let mut y = g[..k].to_vec();
    for i in (0..k).rev() {
        y[i] /= rcols[i][i];
        for r in 0..i {
            y[r] -= rcols[i][r] * y[i];
        }
    }
    y
}
