use std::collections::VecDeque;

use crate::linalg::{axpy, dot, norm2};
use crate::problems::LinearOperator;

use super::{check_dims, residual, KrylovError, KrylovStatus, KrylovTrace};

/// ORTHOMIN(m), the truncated generalized conjugate residual method.
///
/// Each new direction starts from the current residual `r` and is made
/// `Aᵀ A`-orthogonal to the last `m` directions:
///
/// ```text
/// p  = r − Σ βᵢ pᵢ,   βᵢ = (A r, A pᵢ)/(A pᵢ, A pᵢ)
/// α  = (r, A p)/(A p, A p),   x += α p,   r −= α A p
/// ```
///
/// ORTHOMIN(0) keeps no directions and reduces to the minimal residual
/// iteration.
pub fn orthomin_solve(
    a: &dyn LinearOperator,
    b: &[f64],
    x0: &[f64],
    m: usize,
    tol: f64,
    maxit: usize,
) -> Result<(Vec<f64>, KrylovTrace), KrylovError> {
    check_dims(a, b, x0)?;
    let mut x = x0.to_vec();
    let mut r = residual(a, b, &x);
    let mut rnorm = norm2(&r);
    let mut trace = KrylovTrace::start(&x, rnorm);
    if rnorm < tol {
        trace.status = KrylovStatus::Converged;
        return Ok((x, trace));
    }

    let mut dirs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut p = r.clone();
    let mut ap = a.apply(&p);

    for _ in 0..maxit {
        let apap = dot(&ap, &ap);
        if apap == 0.0 {
            trace.status = KrylovStatus::Stalled;
            return Ok((x, trace));
        }
        let alpha = dot(&r, &ap) / apap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        rnorm = norm2(&r);
        trace.push(&x, rnorm);
        if rnorm < tol {
            trace.status = KrylovStatus::Converged;
            return Ok((x, trace));
        }

        if m > 0 {
            dirs.push_back((p, ap, apap));
            while dirs.len() > m {
                dirs.pop_front();
            }
        }
        let ar = a.apply(&r);
        p = r.clone();
        ap = ar.clone();
        for (pi, api, apiapi) in &dirs {
            let beta = dot(&ar, api) / apiapi;
            axpy(-beta, pi, &mut p);
            axpy(-beta, api, &mut ap);
        }
    }
    Ok((x, trace))
}
