use super::dense::{dot, DenseMatrix};
use super::qr::qr_factor;
use super::{LinalgError, RANK_TOL};

/// Affine mixing weights in both coordinate systems.
///
/// `alpha` holds barycentric weights over `m + 1` columns and always sums to
/// one; `gamma` holds the `m` weights on the consecutive-difference basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingCoefficients {
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl MixingCoefficients {
    pub fn from_gamma(gamma: Vec<f64>) -> Self {
        Self {
            alpha: gamma_to_alpha(&gamma),
            gamma,
        }
    }

    /// Depth `m` of the combination (number of difference columns).
    pub fn depth(&self) -> usize {
        self.gamma.len()
    }
}

/// Which kernel produced a least-squares solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LstsqPath {
    /// Nothing to solve (single column or empty difference basis).
    Trivial,
    /// Explicit normal equations on one or two difference columns.
    NormalEquations,
    /// Column-pivoted Householder QR.
    PivotedQr,
}

/// Solution of an unconstrained least-squares problem `min ‖rhs − basis·γ‖₂`.
#[derive(Debug, Clone)]
pub struct LstsqSolution {
    pub gamma: Vec<f64>,
    pub rank: usize,
    pub path: LstsqPath,
}

/// Output of [`solve_mixing`].
#[derive(Debug, Clone)]
pub struct MixingSolution {
    pub coeffs: MixingCoefficients,
    pub mixed_residual: Vec<f64>,
    /// Numerical rank of the difference basis.
    pub rank: usize,
    /// Difference columns dropped by the rank guard.
    pub dropped: usize,
    pub path: LstsqPath,
}

/// `α₀ = γ₁`, `αᵢ = γᵢ₊₁ − γᵢ`, `α_m = 1 − γ_m`.
pub fn gamma_to_alpha(gamma: &[f64]) -> Vec<f64> {
    let m = gamma.len();
    if m == 0 {
        return vec![1.0];
    }
    let mut alpha = Vec::with_capacity(m + 1);
    alpha.push(gamma[0]);
    for i in 1..m {
        alpha.push(gamma[i] - gamma[i - 1]);
    }
    alpha.push(1.0 - gamma[m - 1]);
    alpha
}

/// Inverse of [`gamma_to_alpha`]: `γᵢ = α₀ + … + α_{i−1}`.
pub fn alpha_to_gamma(alpha: &[f64]) -> Vec<f64> {
    alpha
        .iter()
        .take(alpha.len().saturating_sub(1))
        .scan(0.0, |acc, a| {
            *acc += a;
            Some(*acc)
        })
        .collect()
}

/// Least-squares solve over the numerically full-rank column subset of
/// `basis`, using column-pivoted QR. Dropped columns receive weight zero.
pub fn solve_unconstrained_ls(basis: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
    Ok(lstsq_qr(basis, rhs)?.gamma)
}

pub(crate) fn lstsq_qr(basis: &DenseMatrix, rhs: &[f64]) -> Result<LstsqSolution, LinalgError> {
    if basis.cols() == 0 {
        return Err(LinalgError::Empty);
    }
    if rhs.len() != basis.rows() {
        return Err(LinalgError::DimensionMismatch {
            expected: basis.rows(),
            found: rhs.len(),
        });
    }
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::NonFiniteInput);
    }
    let qr = qr_factor(basis, RANK_TOL)?;
    let rank = qr.numerical_rank;
    let qtb: Vec<f64> = (0..rank).map(|i| dot(qr.q.col(i), rhs)).collect();

    let mut z = vec![0.0; rank];
    for i in (0..rank).rev() {
        let mut s = qtb[i];
        for (j, &zj) in z.iter().enumerate().skip(i + 1) {
            s -= qr.r[(i, j)] * zj;
        }
        z[i] = s / qr.r[(i, i)];
    }
    let mut gamma = vec![0.0; basis.cols()];
    for (i, zi) in z.into_iter().enumerate() {
        gamma[qr.col_perm[i]] = zi;
    }
    Ok(LstsqSolution {
        gamma,
        rank,
        path: LstsqPath::PivotedQr,
    })
}

/// Reciprocal-condition floor for the 2×2 Gram fast path; below it the QR
/// path is used so the squared conditioning never costs more than ~1e-12.
const GRAM_RCOND_MIN: f64 = 1e-4;

/// Normal-equations solve for one or two columns. Returns `None` when the
/// Gram matrix is too ill-conditioned (or singular) for the explicit form.
pub(crate) fn lstsq_normal_small(basis: &DenseMatrix, rhs: &[f64]) -> Option<LstsqSolution> {
    match basis.cols() {
        1 => {
            let d = basis.col(0);
            let dd = dot(d, d);
            if dd == 0.0 || !dd.is_finite() {
                return None;
            }
            Some(LstsqSolution {
                gamma: vec![dot(d, rhs) / dd],
                rank: 1,
                path: LstsqPath::NormalEquations,
            })
        }
        2 => {
            let (d1, d2) = (basis.col(0), basis.col(1));
            let g11 = dot(d1, d1);
            let g12 = dot(d1, d2);
            let g22 = dot(d2, d2);
            let det = g11 * g22 - g12 * g12;
            // Eigenvalues of the symmetric 2×2 Gram matrix.
            let half_tr = 0.5 * (g11 + g22);
            let disc = (0.25 * (g11 - g22) * (g11 - g22) + g12 * g12).sqrt();
            let lmax = half_tr + disc;
            let lmin = det / lmax;
            if lmax.is_nan() || lmax <= 0.0 || lmin.is_nan() || lmin <= GRAM_RCOND_MIN * lmax {
                return None;
            }
            let b1 = dot(d1, rhs);
            let b2 = dot(d2, rhs);
            Some(LstsqSolution {
                gamma: vec![(g22 * b1 - g12 * b2) / det, (g11 * b2 - g12 * b1) / det],
                rank: 2,
                path: LstsqPath::NormalEquations,
            })
        }
        _ => None,
    }
}

/// Builds the consecutive-difference basis `[c₁−c₀, …, c_m−c_{m−1}]`.
pub fn difference_columns<V: AsRef<[f64]>>(columns: &[V]) -> Result<DenseMatrix, LinalgError> {
    let diffs: Vec<Vec<f64>> = columns
        .windows(2)
        .map(|w| super::dense::sub(w[1].as_ref(), w[0].as_ref()))
        .collect();
    if diffs.is_empty() {
        let rows = columns.first().map_or(0, |c| c.as_ref().len());
        return Ok(DenseMatrix::zeros(rows, 0));
    }
    DenseMatrix::from_columns(&diffs)
}

/// Solves `min ‖F·α‖₂ s.t. Σα = 1` for the columns of `residual_columns`
/// (oldest first, newest last).
///
/// The problem is moved to the affine frame anchored at the newest column,
/// solved as an unconstrained least-squares problem on the consecutive
/// differences and mapped back with [`gamma_to_alpha`]. One or two
/// difference columns go through the explicit normal equations when they are
/// well conditioned; everything else uses pivoted QR.
pub fn solve_mixing(residual_columns: &DenseMatrix) -> Result<MixingSolution, LinalgError> {
    let cols: Vec<&[f64]> = (0..residual_columns.cols())
        .map(|j| residual_columns.col(j))
        .collect();
    solve_mixing_columns(&cols, true)
}

/// Column-slice form of [`solve_mixing`]; `allow_fast_path = false` forces
/// the QR kernel.
pub fn solve_mixing_columns(
    columns: &[&[f64]],
    allow_fast_path: bool,
) -> Result<MixingSolution, LinalgError> {
    let newest = *columns.last().ok_or(LinalgError::Empty)?;
    if columns.iter().any(|c| c.iter().any(|v| !v.is_finite())) {
        return Err(LinalgError::NonFiniteInput);
    }
    let basis = difference_columns(columns)?;
    let m = basis.cols();

    let sol = if m == 0 {
        LstsqSolution {
            gamma: Vec::new(),
            rank: 0,
            path: LstsqPath::Trivial,
        }
    } else {
        let fast = if allow_fast_path {
            lstsq_normal_small(&basis, newest)
        } else {
            None
        };
        match fast {
            Some(s) => s,
            None => lstsq_qr(&basis, newest)?,
        }
    };

    let coeffs = MixingCoefficients::from_gamma(sol.gamma);
    let mixed_residual = super::dense::combine(columns, &coeffs.alpha);
    Ok(MixingSolution {
        coeffs,
        mixed_residual,
        rank: sol.rank,
        dropped: m - sol.rank,
        path: sol.path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense::norm2;
    use crate::rng::SplitMix64;

    fn random_columns(rows: usize, cols: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = SplitMix64::new(seed);
        (0..cols)
            .map(|_| (0..rows).map(|_| rng.uniform(-1.0, 1.0)).collect())
            .collect()
    }

    /// Independent Gaussian-elimination solve of the normal equations.
    fn normal_equations_oracle(cols: &[Vec<f64>], rhs: &[f64]) -> Vec<f64> {
        let m = cols.len();
        let mut a = vec![vec![0.0; m + 1]; m];
        for i in 0..m {
            for j in 0..m {
                a[i][j] = cols[i].iter().zip(&cols[j]).map(|(x, y)| x * y).sum();
            }
            a[i][m] = cols[i].iter().zip(rhs).map(|(x, y)| x * y).sum();
        }
        for p in 0..m {
            let piv = (p..m)
                .max_by(|&x, &y| a[x][p].abs().total_cmp(&a[y][p].abs()))
                .unwrap();
            a.swap(p, piv);
            for r in p + 1..m {
                let f = a[r][p] / a[p][p];
                for c in p..=m {
                    a[r][c] -= f * a[p][c];
                }
            }
        }
        let mut x = vec![0.0; m];
        for i in (0..m).rev() {
            let s: f64 = (i + 1..m).map(|j| a[i][j] * x[j]).sum();
            x[i] = (a[i][m] - s) / a[i][i];
        }
        x
    }

    #[test]
    fn gamma_alpha_examples() {
        assert_eq!(gamma_to_alpha(&[]), vec![1.0]);
        let a = gamma_to_alpha(&[0.3]);
        assert!((a[0] - 0.3).abs() < 1e-15 && (a[1] - 0.7).abs() < 1e-15);
        let a = gamma_to_alpha(&[0.2, 0.5]);
        for (x, y) in a.iter().zip([0.2, 0.3, 0.5]) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_fit_single_column() {
        let b = vec![1.0, -2.0, 3.0];
        let basis = DenseMatrix::from_columns(&[b.clone()]).unwrap();
        let g = solve_unconstrained_ls(&basis, &b).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn orthonormal_basis() {
        let basis = DenseMatrix::identity(2);
        let g = solve_unconstrained_ls(&basis, &[3.0, 4.0]).unwrap();
        assert!((g[0] - 3.0).abs() < 1e-14 && (g[1] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn matches_normal_equations_oracle() {
        let cols = random_columns(8, 3, 5);
        let rhs = random_columns(8, 1, 6).remove(0);
        let basis = DenseMatrix::from_columns(&cols).unwrap();
        let g = solve_unconstrained_ls(&basis, &rhs).unwrap();
        let oracle = normal_equations_oracle(&cols, &rhs);
        for (a, b) in g.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        // Residual orthogonal to every column.
        let resid: Vec<f64> = rhs
            .iter()
            .zip(basis.matvec(&g))
            .map(|(r, bg)| r - bg)
            .collect();
        for c in &cols {
            assert!(dot(c, &resid).abs() <= 1e-8 * norm2(&rhs));
        }
    }

    #[test]
    fn dimension_and_finiteness_errors() {
        let basis = DenseMatrix::identity(2);
        assert!(matches!(
            solve_unconstrained_ls(&basis, &[1.0]),
            Err(LinalgError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            solve_unconstrained_ls(&basis, &[1.0, f64::NAN]),
            Err(LinalgError::NonFiniteInput)
        ));
    }

    #[test]
    fn rank_deficient_basis_drops_columns() {
        let v = vec![1.0, 1.0, 0.0];
        let basis = DenseMatrix::from_columns(&[v.clone(), v.clone()]).unwrap();
        let g = solve_unconstrained_ls(&basis, &[2.0, 2.0, 1.0]).unwrap();
        assert_eq!(g.iter().filter(|x| **x == 0.0).count(), 1);
        assert!((g[0] + g[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn mixing_single_column() {
        let f = vec![0.5, -1.0];
        let m = DenseMatrix::from_columns(&[f.clone()]).unwrap();
        let sol = solve_mixing(&m).unwrap();
        assert_eq!(sol.coeffs.alpha, vec![1.0]);
        assert_eq!(sol.mixed_residual, f);
        assert_eq!(sol.path, LstsqPath::Trivial);
    }

    #[test]
    fn mixing_symmetric_pair() {
        let m = DenseMatrix::identity(2);
        let sol = solve_mixing(&m).unwrap();
        assert!((sol.coeffs.alpha[0] - 0.5).abs() < 1e-15);
        assert!((sol.coeffs.alpha[1] - 0.5).abs() < 1e-15);
        assert!((norm2(&sol.mixed_residual) - 0.5_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn mixing_zero_column_wins() {
        for j in 0..3 {
            let mut cols = random_columns(4, 3, 9);
            cols[j] = vec![0.0; 4];
            let m = DenseMatrix::from_columns(&cols).unwrap();
            for fast in [true, false] {
                let refs: Vec<&[f64]> = (0..3).map(|c| m.col(c)).collect();
                let sol = solve_mixing_columns(&refs, fast).unwrap();
                for (i, a) in sol.coeffs.alpha.iter().enumerate() {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (a - e).abs() < 1e-12,
                        "column {j}: alpha = {:?}",
                        sol.coeffs.alpha
                    );
                }
                assert!(norm2(&sol.mixed_residual) < 1e-14);
            }
        }
    }

    #[test]
    fn fast_path_agrees_with_qr() {
        for seed in 0..20 {
            for ncols in [2, 3] {
                let cols = random_columns(7, ncols, 100 + seed);
                let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
                let fast = solve_mixing_columns(&refs, true).unwrap();
                let qr = solve_mixing_columns(&refs, false).unwrap();
                assert_eq!(fast.path, LstsqPath::NormalEquations);
                assert_eq!(qr.path, LstsqPath::PivotedQr);
                for (a, b) in fast.coeffs.gamma.iter().zip(&qr.coeffs.gamma) {
                    assert!((a - b).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn ill_conditioned_pair_falls_back_to_qr() {
        let d = vec![1.0, 2.0, 3.0];
        let cols = vec![
            vec![0.0; 3],
            d.clone(),
            d.iter().map(|x| 2.0 * x + 1e-9).collect(),
        ];
        let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
        let sol = solve_mixing_columns(&refs, true).unwrap();
        assert_eq!(sol.path, LstsqPath::PivotedQr);
    }
}
