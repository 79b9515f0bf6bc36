use crate::linalg::{combine, solve_mixing_columns, LstsqPath, MixingCoefficients};
use crate::problems::Problem;

use super::window::{Depth, HistoryWindow};
use super::AccelError;

/// Which residual a CROP update carries forward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepResidual {
    /// Mixed residual `Σ αᵢ fᵢ` (classic CROP).
    Control,
    /// `f(x_next)` evaluated afresh (rCROP).
    Real,
}

/// Result of one CROP update.
#[derive(Debug, Clone)]
pub struct CropStep {
    pub x_tilde: Vec<f64>,
    pub f_tilde: Vec<f64>,
    pub x_next: Vec<f64>,
    pub f_next: Vec<f64>,
    pub coeffs: MixingCoefficients,
    pub rank: usize,
    pub dropped: usize,
    pub path: LstsqPath,
}

/// Residual columns used for the mixing problem: the last `min(len, m)`
/// stored pairs plus the trial pair.
fn crop_columns(window: &HistoryWindow) -> usize {
    match window.depth() {
        Depth::Finite(m) => window.len().min(m),
        Depth::Untruncated => window.len(),
    }
}

/// One CROP update from the newest stored pair `(x_C, f_C)`:
///
/// ```text
/// x̃ = x_C + β·f_C,   f̃ = f(x̃)
/// α  = argmin ‖[F, f̃]·α‖₂  s.t. Σα = 1
/// x_next = [X, x̃]·α
/// ```
///
/// `f_next` is `[F, f̃]·α` in control mode and `f(x_next)` in real mode.
pub fn crop_step(
    window: &HistoryWindow,
    problem: &Problem,
    mode: StepResidual,
    beta: f64,
) -> Result<CropStep, AccelError> {
    let (x_c, f_c) = window.latest().ok_or(AccelError::EmptyWindow)?;
    let x_tilde: Vec<f64> = x_c.iter().zip(f_c).map(|(x, f)| x + beta * f).collect();
    let f_tilde = problem.residual(&x_tilde);
    crop_step_with_trial(window, x_tilde, f_tilde, mode, problem)
}

/// CROP update for an already evaluated trial pair `(x̃, f̃)`.
pub fn crop_step_with_trial(
    window: &HistoryWindow,
    x_tilde: Vec<f64>,
    f_tilde: Vec<f64>,
    mode: StepResidual,
    problem: &Problem,
) -> Result<CropStep, AccelError> {
    let count = crop_columns(window);
    let mut xs = window.iterates_tail(count);
    let mut fs = window.residuals_tail(count);
    xs.push(&x_tilde);
    fs.push(&f_tilde);

    let sol = solve_mixing_columns(&fs, true)?;
    let x_next = combine(&xs, &sol.coeffs.alpha);
    let f_next = match mode {
        StepResidual::Control => sol.mixed_residual,
        StepResidual::Real => problem.residual(&x_next),
    };
    Ok(CropStep {
        x_tilde,
        f_tilde,
        x_next,
        f_next,
        coeffs: sol.coeffs,
        rank: sol.rank,
        dropped: sol.dropped,
        path: sol.path,
    })
}

/// Running CROP(m) iteration holding `(x_C, f_C)` pairs.
#[derive(Debug, Clone)]
pub struct CropState {
    window: HistoryWindow,
    beta: f64,
}

impl CropState {
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

    /// `(x_C⁽ᵏ⁾, f_C⁽ᵏ⁾)`
    pub fn current(&self) -> (&[f64], &[f64]) {
        self.window.latest().expect("window is never empty")
    }

    /// Trial pair `x̃ = x_C + β·f_C` and `f(x̃)` for the next step.
    pub fn trial(&self, problem: &Problem) -> (Vec<f64>, Vec<f64>) {
        let (x, f) = self.current();
        let x_tilde: Vec<f64> = x.iter().zip(f).map(|(x, f)| x + self.beta * f).collect();
        let f_tilde = problem.residual(&x_tilde);
        (x_tilde, f_tilde)
    }

    pub fn step(&mut self, problem: &Problem, mode: StepResidual) -> Result<CropStep, AccelError> {
        let step = crop_step(&self.window, problem, mode, self.beta)?;
        self.commit(&step);
        Ok(step)
    }

    /// Finishes a step whose trial pair was already evaluated by [`CropState::trial`].
    pub fn step_with_trial(
        &mut self,
        problem: &Problem,
        x_tilde: Vec<f64>,
        f_tilde: Vec<f64>,
        mode: StepResidual,
    ) -> Result<CropStep, AccelError> {
        let step = crop_step_with_trial(&self.window, x_tilde, f_tilde, mode, problem)?;
        self.commit(&step);
        Ok(step)
    }

    /// Swaps the newest stored residual (used when switching to real residuals).
    pub fn replace_current_residual(&mut self, f: Vec<f64>) {
        self.window.replace_latest_residual(f);
    }

    fn commit(&mut self, step: &CropStep) {
        self.window.push(step.x_next.clone(), step.f_next.clone());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm2;
    use crate::problems::{build_problem, ProblemSpec};

    #[test]
    fn scalar_linear_solved_in_one_step() {
        // f(x) = b − a·x with a = 3, b = 2.
        let p = Problem::from_residual("scalar", 1, |x| vec![2.0 - 3.0 * x[0]]);
        let mut s = CropState::new(&p, vec![0.0], Depth::Finite(1), 1.0);
        let step = s.step(&p, StepResidual::Control).unwrap();
        assert!((step.x_next[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!(step.f_next[0].abs() < 1e-15);
    }

    #[test]
    fn first_step_mixes_two_columns() {
        let p = build_problem(&ProblemSpec::SmallNonlinear).unwrap();
        let s = CropState::new(&p, vec![0.1, 0.1], Depth::Finite(3), 1.0);
        let step = crop_step(s.window(), &p, StepResidual::Control, 1.0).unwrap();
        assert_eq!(step.coeffs.alpha.len(), 2);
        assert_eq!(step.x_tilde, p.map(&[0.1, 0.1]));
    }

    #[test]
    fn window_uses_at_most_m_stored_pairs() {
        let p = build_problem(&ProblemSpec::LinearTridiag { n: 12 }).unwrap();
        let mut s = CropState::new(&p, vec![0.0; 12], Depth::Finite(2), 1.0);
        for k in 0..6 {
            let step = s.step(&p, StepResidual::Control).unwrap();
            assert_eq!(step.coeffs.alpha.len(), (k + 1).min(2) + 1);
        }
    }

    #[test]
    fn real_mode_carries_true_residual() {
        let p = build_problem(&ProblemSpec::SmallNonlinear).unwrap();
        let mut s = CropState::new(&p, vec![0.1, 0.1], Depth::Finite(2), 1.0);
        for _ in 0..3 {
            let step = s.step(&p, StepResidual::Real).unwrap();
            let r = p.residual(&step.x_next);
            assert_eq!(norm2(&step.f_next), norm2(&r));
        }
    }
}
