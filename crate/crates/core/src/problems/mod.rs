//! Benchmark problems: each supplies a residual `f` and a fixed-point map
//! `g(x) = x + f(x)`.
//!
//! Problems are immutable once built and safe to evaluate from several
//! threads at once.

mod delay_nep;
mod matrix_market;
mod operator;
mod quadrature;

use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::linalg::{dot, norm2, DenseMatrix};
use crate::rng::SplitMix64;

pub use delay_nep::{nep_matrix, DelayNepData};
pub use matrix_market::{
    load_matrix_market, read_matrix_market, read_matrix_market_file, MatrixMarketMatrix, MmSymmetry,
};
pub use operator::{BandedOperator, CsrOperator, DenseOperator, Laplacian2d, LinearOperator};
pub use quadrature::{gauss_legendre, integrate};

#[derive(Debug, thiserror::Error)]
pub enum ProblemError {
    #[error("invalid problem spec: {0}")]
    InvalidSpec(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("parse error on line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("unsupported matrix format: {0}")]
    UnsupportedFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

type ResidualFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

#[derive(Clone)]
enum Kind {
    /// `f(x) = b − A·x`
    Linear {
        op: Arc<dyn LinearOperator>,
        rhs: Vec<f64>,
    },
    /// `f(x) = A·x + (μ‖x‖²/n)·x − b`
    DominantLinear {
        op: Arc<dyn LinearOperator>,
        rhs: Vec<f64>,
        mu: f64,
    },
    SmallNonlinear,
    /// `f(x) = L·x + h²λ·exp(x)`
    Bratu {
        op: Laplacian2d,
        h2_lambda: f64,
    },
    DelayNep(Arc<DelayNepData>),
    Custom(Arc<ResidualFn>),
}

/// A fixed-point problem `g(x) = x` with residual `f(x) = g(x) − x`.
///
/// A problem may carry a residual scale `β` (see [`Problem::damped`]); its
/// residual is then `β·f₀` and its map `x + β·f₀`.
#[derive(Clone)]
pub struct Problem {
    label: String,
    dimension: usize,
    kind: Kind,
    scale: f64,
    exact_solution: Option<Vec<f64>>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("label", &self.label)
            .field("dimension", &self.dimension)
            .field("scale", &self.scale)
            .finish_non_exhaustive()
    }
}

impl Problem {
    /// Linear problem `f(x) = b − A·x`.
    pub fn linear(
        label: impl Into<String>,
        op: Arc<dyn LinearOperator>,
        rhs: Vec<f64>,
    ) -> Result<Self, ProblemError> {
        if rhs.len() != op.dimension() {
            return Err(ProblemError::DimensionMismatch {
                expected: op.dimension(),
                found: rhs.len(),
            });
        }
        Ok(Self {
            label: label.into(),
            dimension: rhs.len(),
            kind: Kind::Linear { op, rhs },
            scale: 1.0,
            exact_solution: None,
        })
    }

    /// Problem defined by an arbitrary residual function.
    pub fn from_residual<F>(label: impl Into<String>, dimension: usize, residual: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            dimension,
            kind: Kind::Custom(Arc::new(residual)),
            scale: 1.0,
            exact_solution: None,
        }
    }

    pub fn with_exact_solution(mut self, x: Vec<f64>) -> Self {
        self.exact_solution = Some(x);
        self
    }

    /// The same problem with residual `β·f` and map `x + β·f(x)`.
    pub fn damped(&self, beta: f64) -> Self {
        let mut p = self.clone();
        p.scale *= beta;
        p.label = format!("{}[beta={beta}]", self.label);
        p
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn exact_solution(&self) -> Option<&[f64]> {
        self.exact_solution.as_deref()
    }

    /// Residual scale applied on top of the base residual.
    pub fn residual_scale(&self) -> f64 {
        self.scale
    }

    /// `(A, b)` for problems of the form `f(x) = b − A·x` with unit scale.
    pub fn linear_parts(&self) -> Option<(&dyn LinearOperator, &[f64])> {
        match &self.kind {
            Kind::Linear { op, rhs } if self.scale == 1.0 => Some((op.as_ref(), rhs.as_slice())),
            _ => None,
        }
    }

    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dimension);
        let mut f = self.base_residual(x);
        if self.scale != 1.0 {
            f.iter_mut().for_each(|v| *v *= self.scale);
        }
        f
    }

    pub fn map(&self, x: &[f64]) -> Vec<f64> {
        if let (Kind::SmallNonlinear, true) = (&self.kind, self.scale == 1.0) {
            return small_nonlinear_map(x);
        }
        let f = self.residual(x);
        x.iter().zip(&f).map(|(a, b)| a + b).collect()
    }

    fn base_residual(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::Linear { op, rhs } => {
                let ax = op.apply(x);
                rhs.iter().zip(&ax).map(|(b, a)| b - a).collect()
            }
            Kind::DominantLinear { op, rhs, mu } => {
                let c = mu * dot(x, x) / self.dimension as f64;
                let ax = op.apply(x);
                ax.iter()
                    .zip(x)
                    .zip(rhs)
                    .map(|((a, xi), b)| a + c * xi - b)
                    .collect()
            }
            Kind::SmallNonlinear => {
                let g = small_nonlinear_map(x);
                g.iter().zip(x).map(|(g, x)| g - x).collect()
            }
            Kind::Bratu { op, h2_lambda } => {
                let mut lx = op.apply(x);
                for (l, xi) in lx.iter_mut().zip(x) {
                    *l += h2_lambda * xi.exp();
                }
                lx
            }
            Kind::DelayNep(data) => data.bordered_residual(x),
            Kind::Custom(f) => f(x),
        }
    }
}

fn small_nonlinear_map(x: &[f64]) -> Vec<f64> {
    let (x1, x2) = (x[0], x[1]);
    vec![0.5 * (x1 + x1 * x1 + x2 * x2), 0.5 * (x2 + x1 * x1)]
}

/// `x + β·f(x)`.
pub fn evaluate_map_damped(p: &Problem, x: &[f64], beta: f64) -> Result<Vec<f64>, ProblemError> {
    if x.len() != p.dimension() {
        return Err(ProblemError::DimensionMismatch {
            expected: p.dimension(),
            found: x.len(),
        });
    }
    if beta == 1.0 {
        return Ok(p.map(x));
    }
    let f = p.residual(x);
    Ok(x.iter().zip(&f).map(|(a, b)| a + beta * b).collect())
}

fn default_mu() -> f64 {
    0.01
}
fn default_nep_beta() -> f64 {
    0.1
}
fn default_tau() -> f64 {
    1.0
}
fn default_quad_nodes() -> usize {
    32
}
fn default_shift() -> f64 {
    2.0
}

/// Serializable description of a benchmark problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// `A = tridiag(1, −4, 1)`, `b = e₁`.
    LinearTridiag {
        n: usize,
    },
    /// Bands `(0, 0, 1, −4, 1, 1, 1)` at offsets −3..=3, `b = e₁`.
    LinearSevendiag {
        n: usize,
    },
    /// `A = [[1/3, −1/4], [0, 2/3]]`, `b = 0`.
    LinearSmall2x2,
    /// User matrix given as rows.
    LinearCustom {
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    /// `A = shift·I + G/√n` with standard normal `G` (symmetrized on request),
    /// `b` uniform in `[−1, 1]`.
    LinearRandom {
        n: usize,
        seed: u64,
        #[serde(default = "default_shift")]
        shift: f64,
        #[serde(default)]
        symmetric: bool,
    },
    DominantLinear {
        n: usize,
        #[serde(default = "default_mu")]
        mu: f64,
    },
    SmallNonlinear,
    Bratu {
        grid: usize,
        lambda: f64,
    },
    DelayNep {
        #[serde(default = "default_nep_beta")]
        beta: f64,
        #[serde(default = "default_tau")]
        tau: f64,
        #[serde(default = "default_quad_nodes")]
        quad_nodes: usize,
    },
    /// `A` from a Matrix Market file, `b = A·𝟙` so that the solution is `𝟙`.
    MatrixMarket {
        path: PathBuf,
    },
}

fn positive(name: &str, n: usize) -> Result<(), ProblemError> {
    if n == 0 {
        return Err(ProblemError::InvalidSpec(format!(
            "{name} must be positive"
        )));
    }
    Ok(())
}

fn unit_vector(n: usize) -> Vec<f64> {
    let mut b = vec![0.0; n];
    b[0] = 1.0;
    b
}

pub fn build_problem(spec: &ProblemSpec) -> Result<Problem, ProblemError> {
    match spec {
        ProblemSpec::LinearTridiag { n } => {
            positive("n", *n)?;
            let op = BandedOperator::tridiagonal(*n, 1.0, -4.0, 1.0);
            Problem::linear(
                format!("linear_tridiag(n={n})"),
                Arc::new(op),
                unit_vector(*n),
            )
        }
        ProblemSpec::LinearSevendiag { n } => {
            positive("n", *n)?;
            let op = BandedOperator::from_centered_bands(*n, &[0.0, 0.0, 1.0, -4.0, 1.0, 1.0, 1.0]);
            Problem::linear(
                format!("linear_sevendiag(n={n})"),
                Arc::new(op),
                unit_vector(*n),
            )
        }
        ProblemSpec::LinearSmall2x2 => {
            let a = DenseMatrix::from_rows(&[vec![1.0 / 3.0, -0.25], vec![0.0, 2.0 / 3.0]])
                .expect("2x2 literal");
            Ok(Problem::linear(
                "linear_small2x2",
                Arc::new(DenseOperator::new(a)),
                vec![0.0; 2],
            )?
            .with_exact_solution(vec![0.0; 2]))
        }
        ProblemSpec::LinearCustom { a, b } => {
            positive("b length", b.len())?;
            let m =
                DenseMatrix::from_rows(a).map_err(|e| ProblemError::InvalidSpec(e.to_string()))?;
            if m.rows() != m.cols() {
                return Err(ProblemError::InvalidSpec(format!(
                    "matrix must be square, got {}x{}",
                    m.rows(),
                    m.cols()
                )));
            }
            if !m.is_finite() || b.iter().any(|v| !v.is_finite()) {
                return Err(ProblemError::InvalidSpec("non-finite entries".into()));
            }
            Problem::linear(
                format!("linear_custom(n={})", b.len()),
                Arc::new(DenseOperator::new(m)),
                b.clone(),
            )
        }
        ProblemSpec::LinearRandom {
            n,
            seed,
            shift,
            symmetric,
        } => {
            positive("n", *n)?;
            let n = *n;
            let mut rng = SplitMix64::new(*seed);
            let scale = 1.0 / (n as f64).sqrt();
            let mut a = DenseMatrix::zeros(n, n);
            for j in 0..n {
                for i in 0..n {
                    a[(i, j)] = scale * rng.normal();
                }
            }
            if *symmetric {
                a = symmetrize(&a);
            }
            for i in 0..n {
                a[(i, i)] += shift;
            }
            let b = rng.uniform_vec(n, -1.0, 1.0);
            Problem::linear(
                format!("linear_random(n={n},seed={seed})"),
                Arc::new(DenseOperator::new(a)),
                b,
            )
        }
        ProblemSpec::DominantLinear { n, mu } => {
            positive("n", *n)?;
            Ok(Problem {
                label: format!("dominant_linear(n={n},mu={mu})"),
                dimension: *n,
                kind: Kind::DominantLinear {
                    op: Arc::new(BandedOperator::tridiagonal(*n, 1.0, -4.0, 1.0)),
                    rhs: unit_vector(*n),
                    mu: *mu,
                },
                scale: 1.0,
                exact_solution: None,
            })
        }
        ProblemSpec::SmallNonlinear => Ok(Problem {
            label: "small_nonlinear".into(),
            dimension: 2,
            kind: Kind::SmallNonlinear,
            scale: 1.0,
            exact_solution: Some(vec![0.0, 0.0]),
        }),
        ProblemSpec::Bratu { grid, lambda } => {
            positive("grid", *grid)?;
            if !lambda.is_finite() {
                return Err(ProblemError::InvalidSpec("lambda must be finite".into()));
            }
            let h = 1.0 / (*grid as f64 + 1.0);
            Ok(Problem {
                label: format!("bratu(grid={grid},lambda={lambda})"),
                dimension: grid * grid,
                kind: Kind::Bratu {
                    op: Laplacian2d::new(*grid),
                    h2_lambda: h * h * lambda,
                },
                scale: 1.0,
                exact_solution: None,
            })
        }
        ProblemSpec::DelayNep {
            beta,
            tau,
            quad_nodes,
        } => {
            if !(*beta > 0.0 && beta.is_finite()) {
                return Err(ProblemError::InvalidSpec("beta must be positive".into()));
            }
            if !(*tau > 0.0 && tau.is_finite()) {
                return Err(ProblemError::InvalidSpec("tau must be positive".into()));
            }
            if *quad_nodes < 8 {
                return Err(ProblemError::InvalidSpec(
                    "quad_nodes must be at least 8".into(),
                ));
            }
            let data = DelayNepData::standard(*tau, *quad_nodes);
            Ok(Problem {
                label: format!("delay_nep(beta={beta})"),
                dimension: data.size() + 1,
                kind: Kind::DelayNep(Arc::new(data)),
                scale: *beta,
                exact_solution: None,
            })
        }
        ProblemSpec::MatrixMarket { path } => {
            let op = load_matrix_market(path)?;
            let n = op.dimension();
            positive("matrix size", n)?;
            let b = op.apply(&vec![1.0; n]);
            Ok(Problem::linear(
                format!("matrix_market({})", path.display()),
                Arc::new(op),
                b,
            )?
            .with_exact_solution(vec![1.0; n]))
        }
    }
}

fn symmetrize(a: &DenseMatrix) -> DenseMatrix {
    let n = a.rows();
    let mut s = DenseMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            s[(i, j)] = 0.5 * (a[(i, j)] + a[(j, i)]);
        }
    }
    s
}

/// `max ‖g(x) − x − f(x)‖₂ / (1 + ‖x‖₂)` over the given probes.
pub fn consistency_defect(p: &Problem, probes: &[Vec<f64>]) -> f64 {
    probes
        .iter()
        .map(|x| {
            let g = p.map(x);
            let f = p.residual(x);
            let d: Vec<f64> = g
                .iter()
                .zip(x)
                .zip(&f)
                .map(|((g, x), f)| g - x - f)
                .collect();
            norm2(&d) / (1.0 + norm2(x))
        })
        .fold(0.0, f64::max)
}
