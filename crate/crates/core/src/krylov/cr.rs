use crate::linalg::{axpy, dot, norm2};
use crate::problems::LinearOperator;

use super::{check_dims, is_symmetric, residual, KrylovError, KrylovStatus, KrylovTrace};

/// Conjugate residual method for symmetric operators (two-term recurrence).
pub fn cr_solve(
    a: &dyn LinearOperator,
    b: &[f64],
    x0: &[f64],
    tol: f64,
    maxit: usize,
) -> Result<(Vec<f64>, KrylovTrace), KrylovError> {
    check_dims(a, b, x0)?;
    if !is_symmetric(a) {
        return Err(KrylovError::NotSymmetric);
    }
    let mut x = x0.to_vec();
    let mut r = residual(a, b, &x);
    let mut trace = KrylovTrace::start(&x, norm2(&r));
    if trace.residual_norms[0] < tol {
        trace.status = KrylovStatus::Converged;
        return Ok((x, trace));
    }
    let mut ar = a.apply(&r);
    let mut p = r.clone();
    let mut ap = ar.clone();
    let mut rar = dot(&r, &ar);

    for _ in 0..maxit {
        let apap = dot(&ap, &ap);
        if apap == 0.0 {
            trace.status = KrylovStatus::Stalled;
            return Ok((x, trace));
        }
        let alpha = rar / apap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rnorm = norm2(&r);
        trace.push(&x, rnorm);
        if rnorm < tol {
            trace.status = KrylovStatus::Converged;
            return Ok((x, trace));
        }
        ar = a.apply(&r);
        let rar_next = dot(&r, &ar);
        if rar == 0.0 {
            trace.status = KrylovStatus::Stalled;
            return Ok((x, trace));
        }
        let beta = rar_next / rar;
        rar = rar_next;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        for (api, ari) in ap.iter_mut().zip(&ar) {
            *api = ari + beta * *api;
        }
    }
    Ok((x, trace))
}

/// Minimal residual iteration: `x += α r` with `α = (r, A r)/(A r, A r)`.
pub fn minimal_residual_solve(
    a: &dyn LinearOperator,
    b: &[f64],
    x0: &[f64],
    tol: f64,
    maxit: usize,
) -> Result<(Vec<f64>, KrylovTrace), KrylovError> {
    check_dims(a, b, x0)?;
    let mut x = x0.to_vec();
    let mut r = residual(a, b, &x);
    let mut trace = KrylovTrace::start(&x, norm2(&r));
    if trace.residual_norms[0] < tol {
        trace.status = KrylovStatus::Converged;
        return Ok((x, trace));
    }
    for _ in 0..maxit {
        let ar = a.apply(&r);
        let arar = dot(&ar, &ar);
        if arar == 0.0 {
            trace.status = KrylovStatus::Stalled;
            return Ok((x, trace));
        }
        let alpha = dot(&r, &ar) / arar;
        axpy(alpha, &r.clone(), &mut x);
        axpy(-alpha, &ar, &mut r);
        let rnorm = norm2(&r);
        trace.push(&x, rnorm);
        if rnorm < tol {
            trace.status = KrylovStatus::Converged;
            return Ok((x, trace));
        }
    }
    Ok((x, trace))
}
