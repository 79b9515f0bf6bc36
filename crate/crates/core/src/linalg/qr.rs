use super::dense::{dot, norm2, DenseMatrix};
use super::LinalgError;

/// Householder QR with column pivoting: `M·P = Q·R`.
///
/// `q` has `min(rows, cols)` orthonormal columns and `r` is
/// `min(rows, cols) × cols` upper triangular (trapezoidal for wide input).
/// `col_perm[j]` is the column of `M` that ended up in position `j`.
#[derive(Debug, Clone)]
pub struct QrFactorization {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
    pub col_perm: Vec<usize>,
    pub numerical_rank: usize,
}

impl QrFactorization {
    /// Columns of the input matrix that were judged linearly dependent.
    pub fn dropped_columns(&self) -> &[usize] {
        &self.col_perm[self.numerical_rank..]
    }
}

/// Factorizes `m` with greedy max-norm column pivoting.
///
/// The numerical rank counts the leading diagonal entries of `R` with
/// `|R_ii| > rank_tol·|R_00|`. An all-zero matrix has rank 0.
pub fn qr_factor(m: &DenseMatrix, rank_tol: f64) -> Result<QrFactorization, LinalgError> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(LinalgError::Empty);
    }
    if !m.is_finite() {
        return Err(LinalgError::NonFiniteInput);
    }
    let rows = m.rows();
    let cols = m.cols();
    let steps = rows.min(cols);

    let mut work = m.clone();
    let mut perm: Vec<usize> = (0..cols).collect();
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::with_capacity(steps);

    for j in 0..steps {
        // Trailing norms are recomputed rather than downdated; windows are narrow.
        let (pivot, _) =
            (j..cols)
                .map(|c| (c, norm2(&work.col(c)[j..])))
                .fold(
                    (j, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if pivot != j {
            swap_columns(&mut work, j, pivot);
            perm.swap(j, pivot);
        }

        let x = &work.col(j)[j..];
        let alpha = norm2(x);
        if alpha == 0.0 {
            reflectors.push((vec![0.0; rows - j], 0.0));
            continue;
        }
        let sign = if x[0] >= 0.0 { 1.0 } else { -1.0 };
        let mut v = x.to_vec();
        v[0] += sign * alpha;
        let vnorm_sq = dot(&v, &v);
        let tau = 2.0 / vnorm_sq;

        for c in j..cols {
            let col = &mut work.col_mut(c)[j..];
            let s = tau * dot(&v, col);
            for (ci, vi) in col.iter_mut().zip(&v) {
                *ci -= s * vi;
            }
        }
        // Exact zeros below the diagonal, exact value on it.
        work[(j, j)] = -sign * alpha;
        for i in j + 1..rows {
            work[(i, j)] = 0.0;
        }
        reflectors.push((v, tau));
    }

    let mut r = DenseMatrix::zeros(steps, cols);
    for c in 0..cols {
        for i in 0..=c.min(steps - 1) {
            r[(i, c)] = work[(i, c)];
        }
    }

    // Q = H_0 H_1 … H_{k-1} applied to the first `steps` unit vectors.
    let mut q = DenseMatrix::zeros(rows, steps);
    for c in 0..steps {
        q[(c, c)] = 1.0;
    }
    for (j, (v, tau)) in reflectors.iter().enumerate().rev() {
        if *tau == 0.0 {
            continue;
        }
        for c in 0..steps {
            let col = &mut q.col_mut(c)[j..];
            let s = tau * dot(v, col);
            for (ci, vi) in col.iter_mut().zip(v) {
                *ci -= s * vi;
            }
        }
    }

    let lead = r[(0, 0)].abs();
    let numerical_rank = if lead == 0.0 {
        0
    } else {
        (0..steps)
            .take_while(|&i| r[(i, i)].abs() > rank_tol * lead)
            .count()
    };

    Ok(QrFactorization {
        q,
        r,
        col_perm: perm,
        numerical_rank,
    })
}

fn swap_columns(m: &mut DenseMatrix, a: usize, b: usize) {
    for i in 0..m.rows() {
        let t = m[(i, a)];
        m[(i, a)] = m[(i, b)];
        m[(i, b)] = t;
    }
}
