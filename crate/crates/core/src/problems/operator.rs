use std::fmt;

use crate::linalg::DenseMatrix;

/// A square linear map `v ↦ A·v`.
pub trait LinearOperator: Send + Sync + fmt::Debug {
    fn dimension(&self) -> usize;

    /// Writes `A·v` into `out` (overwriting it).
    fn apply_into(&self, v: &[f64], out: &mut [f64]);

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dimension()];
        self.apply_into(v, &mut out);
        out
    }

    fn description(&self) -> String;

    /// Dense copy, built column by column from `apply`. Intended for small
    /// operators (fixtures, diagnostics).
    fn to_dense(&self) -> DenseMatrix {
        let n = self.dimension();
        let mut m = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply_into(&e, m.col_mut(j));
            e[j] = 0.0;
        }
        m
    }
}

/// Banded Toeplitz matrix: `A[i][i+offset] = value` for every stored band.
#[derive(Debug, Clone)]
pub struct BandedOperator {
    n: usize,
    bands: Vec<(isize, f64)>,
    name: String,
}

impl BandedOperator {
    pub fn new(n: usize, bands: Vec<(isize, f64)>, name: impl Into<String>) -> Self {
        Self {
            n,
            bands,
            name: name.into(),
        }
    }

    /// `tridiag(lower, diag, upper)`.
    pub fn tridiagonal(n: usize, lower: f64, diag: f64, upper: f64) -> Self {
        Self::new(
            n,
            vec![(-1, lower), (0, diag), (1, upper)],
            format!("tridiag({lower},{diag},{upper})"),
        )
    }

    /// Bands listed from the lowest sub-diagonal to the highest
    /// super-diagonal, centred on the main diagonal (odd length).
    pub fn from_centered_bands(n: usize, values: &[f64]) -> Self {
        assert!(values.len() % 2 == 1, "band list must have odd length");
        let half = (values.len() / 2) as isize;
        let bands = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, &v)| (i as isize - half, v))
            .collect();
        let name = format!(
            "banded({})",
            values
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        Self::new(n, bands, name)
    }
}

impl LinearOperator for BandedOperator {
    fn dimension(&self) -> usize {
        self.n
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let n = self.n as isize;
        for &(off, val) in &self.bands {
            let lo = 0.max(-off);
            let hi = n.min(n - off);
            for i in lo..hi {
                out[i as usize] += val * v[(i + off) as usize];
            }
        }
    }

    fn description(&self) -> String {
        format!("{} n={}", self.name, self.n)
    }
}

#[derive(Debug, Clone)]
pub struct DenseOperator {
    matrix: DenseMatrix,
}

impl DenseOperator {
    pub fn new(matrix: DenseMatrix) -> Self {
        assert_eq!(matrix.rows(), matrix.cols(), "operator must be square");
        Self { matrix }
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }
}

impl LinearOperator for DenseOperator {
    fn dimension(&self) -> usize {
        self.matrix.rows()
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.matrix.matvec(v));
    }

    fn description(&self) -> String {
        format!("dense {}x{}", self.matrix.rows(), self.matrix.cols())
    }

    fn to_dense(&self) -> DenseMatrix {
        self.matrix.clone()
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct CsrOperator {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrOperator {
    /// Builds from zero-based `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            values.push(v);
            last = Some((r, c));
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }
}

impl LinearOperator for CsrOperator {
    fn dimension(&self) -> usize {
        self.n
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let span = self.row_ptr[i]..self.row_ptr[i + 1];
            *o = self.col_idx[span.clone()]
                .iter()
                .zip(&self.values[span])
                .map(|(&c, &a)| a * v[c])
                .sum();
        }
    }

    fn description(&self) -> String {
        format!("csr n={} nnz={}", self.n, self.nnz())
    }
}

/// Five-point stencil on a `grid × grid` interior mesh: −4 on the diagonal,
/// +1 for each of the four neighbours, zero Dirichlet boundary, no `1/h²`
/// factor. Unknown `(i, j)` is stored at `i + grid·j`.
#[derive(Debug, Clone)]
pub struct Laplacian2d {
    grid: usize,
}

impl Laplacian2d {
    pub fn new(grid: usize) -> Self {
        Self { grid }
    }

    pub fn grid(&self) -> usize {
        self.grid
    }
}

impl LinearOperator for Laplacian2d {
    fn dimension(&self) -> usize {
        self.grid * self.grid
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let g = self.grid;
        for j in 0..g {
            for i in 0..g {
                let k = i + g * j;
                let mut s = -4.0 * v[k];
                if i > 0 {
                    s += v[k - 1];
                }
                if i + 1 < g {
                    s += v[k + 1];
                }
                if j > 0 {
                    s += v[k - g];
                }
                if j + 1 < g {
                    s += v[k + g];
                }
                out[k] = s;
            }
        }
    }

    fn description(&self) -> String {
        format!("laplacian2d {}x{}", self.grid, self.grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_matches_dense() {
        let op = BandedOperator::tridiagonal(4, 1.0, -4.0, 1.0);
        let d = op.to_dense();
        assert_eq!(d[(0, 0)], -4.0);
        assert_eq!(d[(1, 0)], 1.0);
        assert_eq!(d[(0, 1)], 1.0);
        assert_eq!(d[(0, 2)], 0.0);
        assert_eq!(d[(3, 3)], -4.0);
    }

    #[test]
    fn seven_band_layout() {
        let op = BandedOperator::from_centered_bands(6, &[0.0, 0.0, 1.0, -4.0, 1.0, 1.0, 1.0]);
        let d = op.to_dense();
        assert_eq!(d[(3, 2)], 1.0);
        assert_eq!(d[(3, 1)], 0.0);
        assert_eq!(d[(3, 0)], 0.0);
        assert_eq!(d[(2, 3)], 1.0);
        assert_eq!(d[(2, 4)], 1.0);
        assert_eq!(d[(2, 5)], 1.0);
        assert_eq!(d[(2, 2)], -4.0);
    }

    #[test]
    fn csr_sums_duplicates() {
        let op = CsrOperator::from_triplets(2, vec![(0, 0, 1.0), (1, 0, 2.0), (0, 0, 0.5)]);
        assert_eq!(op.nnz(), 2);
        assert_eq!(op.apply(&[1.0, 1.0]), vec![1.5, 2.0]);
    }

    #[test]
    fn laplacian_is_symmetric() {
        let d = Laplacian2d::new(4).to_dense();
        for i in 0..16 {
            assert_eq!(d[(i, i)], -4.0);
            for j in 0..16 {
                assert_eq!(d[(i, j)], d[(j, i)]);
            }
        }
        // Corner rows have two neighbours.
        let row_sum: f64 = (0..16).map(|j| d[(0, j)]).sum();
        assert_eq!(row_sum, -2.0);
    }
}
