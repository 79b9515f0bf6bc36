use crate::linalg::{combine, solve_mixing_columns, LstsqPath, MixingCoefficients};
use crate::problems::Problem;

use super::window::{Depth, HistoryWindow};
use super::AccelError;

/// Result of one Anderson update.
#[derive(Debug, Clone)]
pub struct AndersonStep {
    pub x_next: Vec<f64>,
    pub coeffs: MixingCoefficients,
    pub rank: usize,
    pub dropped: usize,
    pub path: LstsqPath,
}

impl AndersonStep {
    /// True when every difference column was rejected and the update
    /// degenerated to a damped fixed-point step.
    pub fn is_fallback(&self) -> bool {
        self.coeffs.depth() > 0 && self.rank == 0
    }
}

/// `x_next = Σ αᵢ·(xᵢ + β·fᵢ) = x̄ + β·f̄`, with `α` minimizing `‖Σ αᵢ fᵢ‖₂`
/// subject to `Σ αᵢ = 1` over the whole window.
pub fn anderson_step(window: &HistoryWindow, beta: f64) -> Result<AndersonStep, AccelError> {
    let residuals = window.residuals();
    let sol = solve_mixing_columns(&residuals, true)?;
    let mapped: Vec<Vec<f64>> = window
        .iterates()
        .iter()
        .zip(&residuals)
        .map(|(x, f)| x.iter().zip(*f).map(|(x, f)| x + beta * f).collect())
        .collect();
    let x_next = combine(&mapped, &sol.coeffs.alpha);
    Ok(AndersonStep {
        x_next,
        coeffs: sol.coeffs,
        rank: sol.rank,
        dropped: sol.dropped,
        path: sol.path,
    })
}

/// Running Anderson(m, β) iteration.
///
/// The first update uses a one-entry window and is therefore the plain
/// damped map `x + β·f(x)`.
#[derive(Debug, Clone)]
pub struct AndersonState {
    window: HistoryWindow,
    beta: f64,
}

impl AndersonState {
    pub fn new(problem: &Problem, x0: Vec<f64>, depth: Depth, beta: f64) -> Self {
        let f0 = problem.residual(&x0);
        Self::from_parts(x0, f0, depth, beta)
    }

    pub fn from_parts(x0: Vec<f64>, f0: Vec<f64>, depth: Depth, beta: f64) -> Self {
        let mut window = HistoryWindow::new(depth);
        window.push(x0, f0);
        Self { window, beta }
    }

    pub fn window(&self) -> &HistoryWindow {
        &self.window
    }

    /// `(x⁽ᵏ⁾, f(x⁽ᵏ⁾))`
    pub fn current(&self) -> (&[f64], &[f64]) {
        self.window.latest().expect("window is never empty")
    }

    /// Advances one step; returns the update and `f(x_next)`.
    pub fn step(&mut self, problem: &Problem) -> Result<(AndersonStep, Vec<f64>), AccelError> {
        let step = anderson_step(&self.window, self.beta)?;
        let f_next = problem.residual(&step.x_next);
        self.window.push(step.x_next.clone(), f_next.clone());
        Ok((step, f_next))
    }
}
