use crate::linalg::DenseMatrix;

use super::quadrature::gauss_legendre;

/// Data for the delay nonlinear eigenvalue problem
///
/// ```text
/// M(λ) = −λI + A0 + A1·e^{−λτ} + ∫_{−τ}^{0} F(s)·e^{λs} ds,
/// F(s) = K·(e^{(s+½)²} − e^{¼}) / 10
/// ```
///
/// with the integral evaluated by Gauss–Legendre quadrature.
#[derive(Debug, Clone)]
pub struct DelayNepData {
    pub a0: DenseMatrix,
    pub a1: DenseMatrix,
    /// Constant matrix factor `K` of the distributed-delay kernel.
    pub kernel: DenseMatrix,
    pub tau: f64,
    /// Eigenvector normalization `cᵀv = 1`.
    pub normalization: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl DelayNepData {
    pub fn new(
        a0: DenseMatrix,
        a1: DenseMatrix,
        kernel: DenseMatrix,
        tau: f64,
        normalization: Vec<f64>,
        quad_nodes: usize,
    ) -> Self {
        let (t, w) = gauss_legendre(quad_nodes);
        // Map [-1, 1] onto [-τ, 0].
        let half = 0.5 * tau;
        let nodes = t.iter().map(|t| half * (t - 1.0)).collect();
        let weights = w.iter().map(|w| half * w).collect();
        Self {
            a0,
            a1,
            kernel,
            tau,
            normalization,
            nodes,
            weights,
        }
    }

    /// The 3×3 benchmark instance with `c = (1, 1, 1)`.
    pub fn standard(tau: f64, quad_nodes: usize) -> Self {
        let tenth = |rows: [[f64; 3]; 3]| {
            let rows: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| r.iter().map(|v| v / 10.0).collect())
                .collect();
            DenseMatrix::from_rows(&rows).expect("3x3 literal")
        };
        let a0 = tenth([[25.0, 28.0, -5.0], [18.0, 3.0, 3.0], [-23.0, -14.0, 35.0]]);
        let a1 = tenth([[17.0, 7.0, -3.0], [-24.0, -21.0, -2.0], [20.0, 7.0, 4.0]]);
        let kernel = DenseMatrix::from_rows(&[
            vec![14.0, -13.0, 4.0],
            vec![14.0, 7.0, 10.0],
            vec![6.0, 16.0, 17.0],
        ])
        .expect("3x3 literal");
        Self::new(a0, a1, kernel, tau, vec![1.0; 3], quad_nodes)
    }

    pub fn size(&self) -> usize {
        self.a0.rows()
    }

    pub fn quad_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Scalar weight of the distributed-delay kernel.
    pub fn kernel_weight(s: f64) -> f64 {
        ((s + 0.5).powi(2).exp() - 0.25_f64.exp()) / 10.0
    }

    /// `∫_{−τ}^{0} w(s)·e^{λs} ds` by quadrature.
    pub fn kernel_integral(&self, lambda: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| w * Self::kernel_weight(s) * (lambda * s).exp())
            .sum()
    }

    /// Residual of the bordered system for `x = [v; λ]`:
    /// `[M(λ)·v; cᵀv − 1]`.
    pub fn bordered_residual(&self, x: &[f64]) -> Vec<f64> {
        let n = self.size();
        let (v, lambda) = (&x[..n], x[n]);
        let m = nep_matrix(self, lambda);
        let mut out = m.matvec(v);
        out.push(crate::linalg::dot(&self.normalization, v) - 1.0);
        out
    }
}

/// Assembles `M(λ)`.
pub fn nep_matrix(data: &DelayNepData, lambda: f64) -> DenseMatrix {
    let n = data.size();
    let delay = (-lambda * data.tau).exp();
    let integral = data.kernel_integral(lambda);
    let mut m = DenseMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            m[(i, j)] = data.a0[(i, j)] + delay * data.a1[(i, j)] + integral * data.kernel[(i, j)];
        }
        m[(j, j)] -= lambda;
    }
    m
}
