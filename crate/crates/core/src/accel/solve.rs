use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::linalg::{norm2, MixingCoefficients};
use crate::problems::Problem;

use super::anderson::AndersonState;
use super::crop::{CropState, StepResidual};
use super::diagnostics::{cos_theta, estimate_convergence_factors, ConvergenceDiagnostics};
use super::window::Depth;
use super::AccelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FixedPoint,
    Anderson,
    Crop,
    CropAnderson,
    #[serde(rename = "rcrop")]
    RCrop,
    #[serde(rename = "rcrop_anderson")]
    RCropAnderson,
    AdaptiveCrop,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::FixedPoint,
        Method::Anderson,
        Method::Crop,
        Method::CropAnderson,
        Method::RCrop,
        Method::RCropAnderson,
        Method::AdaptiveCrop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::FixedPoint => "fixed_point",
            Method::Anderson => "anderson",
            Method::Crop => "crop",
            Method::CropAnderson => "crop_anderson",
            Method::RCrop => "rcrop",
            Method::RCropAnderson => "rcrop_anderson",
            Method::AdaptiveCrop => "adaptive_crop",
        }
    }

    /// Whether the method keeps a history window.
    pub fn uses_depth(self) -> bool {
        !matches!(self, Method::FixedPoint)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method {s:?}"))
    }
}

/// Residual stream carried by CROP-type methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualMode {
    #[default]
    Control,
    Real,
    /// Control residuals until a periodic angle check fails, then real ones.
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    pub depth: Depth,
    pub beta: f64,
    /// Absolute threshold on the tracked residual 2-norm.
    pub tol: f64,
    pub maxit: usize,
    /// Residual stream for `crop` / `crop_anderson`; the `r*` and
    /// `adaptive_crop` methods fix their own.
    pub residual_mode: ResidualMode,
    pub adaptive_period: usize,
    pub adaptive_cos_threshold: f64,
    /// Control residuals below this fraction of `‖f(x⁰)‖` count as a
    /// vanished residual.
    pub breakdown_rel_tol: f64,
    /// Evaluate `f(x_C)` every step for reporting (CROP in control mode).
    pub trace_real_residuals: bool,
    /// Keep every reported iterate in the report.
    pub record_iterates: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            depth: Depth::Finite(2),
            beta: 1.0,
            tol: 1e-10,
            maxit: 100,
            residual_mode: ResidualMode::Control,
            adaptive_period: 5,
            adaptive_cos_threshold: 0.99,
            breakdown_rel_tol: 1e-14,
            trace_real_residuals: true,
            record_iterates: false,
        }
    }
}

impl SolveOptions {
    pub fn with_depth(mut self, depth: Depth) -> Self {
        self.depth = depth;
        self
    }

    pub fn validate(&self) -> Result<(), AccelError> {
        let bad = |m: &str| Err(AccelError::InvalidOptions(m.to_string()));
        if self.tol.is_nan() || self.tol <= 0.0 {
            return bad("tol must be positive");
        }
        if self.maxit == 0 {
            return bad("maxit must be at least 1");
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad("beta must be positive");
        }
        if self.depth == Depth::Finite(0) {
            return bad("depth must be at least 1");
        }
        if !(self.adaptive_cos_threshold > 0.0 && self.adaptive_cos_threshold < 1.0) {
            return bad("adaptive_cos_threshold must lie in (0, 1)");
        }
        if self.adaptive_period == 0 {
            return bad("adaptive_period must be at least 1");
        }
        if self.breakdown_rel_tol.is_nan() || self.breakdown_rel_tol < 0.0 {
            return bad("breakdown_rel_tol must be nonnegative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    /// Control residual vanished while the true residual did not.
    Breakdown,
    Stagnation,
    NumericalFailure,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIterations => "max_iterations",
            SolveStatus::Breakdown => "breakdown",
            SolveStatus::Stagnation => "stagnation",
            SolveStatus::NumericalFailure => "numerical_failure",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One row of a solver trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub k: usize,
    /// Norm of the residual the method tracks (control residual for CROP).
    pub control_res_norm: f64,
    pub real_res_norm: Option<f64>,
    /// Weight on the newest column of the mixing step.
    pub alpha_last: Option<f64>,
    pub gamma: Vec<f64>,
    /// Time since the solve started.
    pub wall_nanos: u64,
    /// Difference columns discarded by the rank guard.
    pub dropped_columns: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub method: Method,
    pub depth: Depth,
    pub beta: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub solution: Vec<f64>,
    pub trace: Vec<TraceRecord>,
    pub diagnostics: Option<ConvergenceDiagnostics>,
    /// Residual norm the stopping decision was based on (the true residual
    /// for a breakdown).
    pub final_residual_norm: f64,
    /// `‖f(solution)‖₂`.
    pub final_real_residual: f64,
    /// Step at which an adaptive run switched to real residuals.
    pub switched_to_real_at: Option<usize>,
    /// Mixing coefficients of every step, oldest first.
    #[serde(skip)]
    pub coefficient_history: Vec<MixingCoefficients>,
    /// Reported iterate per trace row (only with `record_iterates`).
    #[serde(skip)]
    pub iterates: Vec<Vec<f64>>,
}

impl SolveReport {
    pub fn control_norms(&self) -> Vec<f64> {
        self.trace.iter().map(|r| r.control_res_norm).collect()
    }
}

const STAGNATION_RTOL: f64 = 1e-15;
const STAGNATION_STEPS: usize = 5;

struct Recorder {
    start: Instant,
    trace: Vec<TraceRecord>,
    iterates: Vec<Vec<f64>>,
    coeffs: Vec<MixingCoefficients>,
    keep_iterates: bool,
    flat_steps: usize,
}

impl Recorder {
    fn new(keep_iterates: bool) -> Self {
        Self {
            start: Instant::now(),
            trace: Vec::new(),
            iterates: Vec::new(),
            coeffs: Vec::new(),
            keep_iterates,
            flat_steps: 0,
        }
    }

    fn record(
        &mut self,
        control: f64,
        real: Option<f64>,
        coeffs: Option<&MixingCoefficients>,
        dropped: usize,
        x: &[f64],
    ) {
        if let Some(prev) = self.trace.last() {
            let p = prev.control_res_norm;
            if (control - p).abs() <= STAGNATION_RTOL * p {
                self.flat_steps += 1;
            } else {
                self.flat_steps = 0;
            }
        }
        if let Some(c) = coeffs {
            self.coeffs.push(c.clone());
        }
        self.trace.push(TraceRecord {
            k: self.trace.len(),
            control_res_norm: control,
            real_res_norm: real,
            alpha_last: coeffs.and_then(|c| c.alpha.last().copied()),
            gamma: coeffs.map(|c| c.gamma.clone()).unwrap_or_default(),
            wall_nanos: self.start.elapsed().as_nanos() as u64,
            dropped_columns: dropped,
        });
        if self.keep_iterates {
            self.iterates.push(x.to_vec());
        }
    }

    fn stagnating(&self) -> bool {
        self.flat_steps >= STAGNATION_STEPS
    }

    fn steps(&self) -> usize {
        self.trace.len().saturating_sub(1)
    }
}

struct Outcome {
    status: SolveStatus,
    solution: Vec<f64>,
    final_residual_norm: f64,
    contraction: Option<f64>,
    switched_to_real_at: Option<usize>,
}

fn finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Runs `method` on `problem` from `x0`.
///
/// Solver failures (breakdown, stagnation, NaN) are reported through
/// [`SolveReport::status`]; only invalid inputs produce an `Err`.
pub fn solve(
    problem: &Problem,
    x0: &[f64],
    method: Method,
    options: &SolveOptions,
) -> Result<SolveReport, AccelError> {
    options.validate()?;
    if x0.len() != problem.dimension() {
        return Err(AccelError::DimensionMismatch {
            expected: problem.dimension(),
            found: x0.len(),
        });
    }
    let mut rec = Recorder::new(options.record_iterates);
    let outcome = match method {
        Method::FixedPoint => run_fixed_point(problem, x0, options, &mut rec),
        Method::Anderson => run_anderson(problem, x0, options, &mut rec),
        Method::Crop => run_crop(problem, x0, options, options.residual_mode, &mut rec),
        Method::RCrop => run_crop(problem, x0, options, ResidualMode::Real, &mut rec),
        Method::AdaptiveCrop => run_crop(problem, x0, options, ResidualMode::Adaptive, &mut rec),
        Method::CropAnderson => {
            let mode = match options.residual_mode {
                ResidualMode::Real => StepResidual::Real,
                _ => StepResidual::Control,
            };
            run_crop_anderson(problem, x0, options, mode, &mut rec)
        }
        Method::RCropAnderson => {
            run_crop_anderson(problem, x0, options, StepResidual::Real, &mut rec)
        }
    };

    let tracked: Vec<f64> = rec.trace.iter().map(|r| r.control_res_norm).collect();
    let diagnostics = match estimate_convergence_factors(&tracked) {
        Ok(mut d) if tracked[0] > 0.0 && d.r_factor_estimate.is_finite() => {
            d.contraction_estimate = outcome.contraction;
            Some(d)
        }
        _ => None,
    };
    let final_real_residual = norm2(&problem.residual(&outcome.solution));
    Ok(SolveReport {
        method,
        depth: options.depth,
        beta: options.beta,
        status: outcome.status,
        iterations: rec.steps(),
        solution: outcome.solution,
        trace: rec.trace,
        diagnostics,
        final_residual_norm: outcome.final_residual_norm,
        final_real_residual,
        switched_to_real_at: outcome.switched_to_real_at,
        coefficient_history: rec.coeffs,
        iterates: rec.iterates,
    })
}

fn simple_outcome(status: SolveStatus, solution: Vec<f64>, norm: f64) -> Outcome {
    Outcome {
        status,
        solution,
        final_residual_norm: norm,
        contraction: None,
        switched_to_real_at: None,
    }
}

fn run_fixed_point(problem: &Problem, x0: &[f64], o: &SolveOptions, rec: &mut Recorder) -> Outcome {
    let mut x = x0.to_vec();
    let mut f = problem.residual(&x);
    let mut r = norm2(&f);
    rec.record(r, Some(r), None, 0, &x);
    if r < o.tol {
        return simple_outcome(SolveStatus::Converged, x, r);
    }
    for _ in 0..o.maxit {
        for (xi, fi) in x.iter_mut().zip(&f) {
            *xi += o.beta * fi;
        }
        f = problem.residual(&x);
        r = norm2(&f);
        rec.record(r, Some(r), None, 0, &x);
        if !r.is_finite() || !finite(&x) {
            return simple_outcome(SolveStatus::NumericalFailure, x, r);
        }
        if r < o.tol {
            return simple_outcome(SolveStatus::Converged, x, r);
        }
        if rec.stagnating() {
            return simple_outcome(SolveStatus::Stagnation, x, r);
        }
    }
    simple_outcome(SolveStatus::MaxIterations, x, r)
}

fn run_anderson(problem: &Problem, x0: &[f64], o: &SolveOptions, rec: &mut Recorder) -> Outcome {
    let mut state = AndersonState::new(problem, x0.to_vec(), o.depth, o.beta);
    let mut r = norm2(state.current().1);
    rec.record(r, Some(r), None, 0, x0);
    if r < o.tol {
        return simple_outcome(SolveStatus::Converged, x0.to_vec(), r);
    }
    for _ in 0..o.maxit {
        let current = state.current().0.to_vec();
        let (step, f) = match state.step(problem) {
            Ok(s) => s,
            Err(_) => return simple_outcome(SolveStatus::NumericalFailure, current, r),
        };
        r = norm2(&f);
        rec.record(r, Some(r), Some(&step.coeffs), step.dropped, &step.x_next);
        if !r.is_finite() || !finite(&step.x_next) {
            return simple_outcome(SolveStatus::NumericalFailure, step.x_next, r);
        }
        if r < o.tol {
            return simple_outcome(SolveStatus::Converged, step.x_next, r);
        }
        if rec.stagnating() {
            return simple_outcome(SolveStatus::Stagnation, step.x_next, r);
        }
    }
    simple_outcome(SolveStatus::MaxIterations, state.current().0.to_vec(), r)
}

fn run_crop(
    problem: &Problem,
    x0: &[f64],
    o: &SolveOptions,
    residual_mode: ResidualMode,
    rec: &mut Recorder,
) -> Outcome {
    let mut state = CropState::new(problem, x0.to_vec(), o.depth, o.beta);
    let r0 = norm2(state.current().1);
    rec.record(r0, Some(r0), None, 0, x0);
    let mut out = Outcome {
        status: SolveStatus::Converged,
        solution: x0.to_vec(),
        final_residual_norm: r0,
        contraction: None,
        switched_to_real_at: None,
    };
    if r0 < o.tol {
        return out;
    }
    let mut mode = match residual_mode {
        ResidualMode::Real => StepResidual::Real,
        _ => StepResidual::Control,
    };
    let adaptive = residual_mode == ResidualMode::Adaptive;
    let mut contraction: f64 = 0.0;
    let mut control = r0;

    for k in 0..o.maxit {
        if adaptive && mode == StepResidual::Control && k > 0 && k % o.adaptive_period == 0 {
            let (x_c, f_c) = state.current();
            let real = problem.residual(x_c);
            // A vanished control residual has no direction to compare; switch.
            let cos = cos_theta(f_c, &real).unwrap_or(0.0);
            if cos <= o.adaptive_cos_threshold {
                mode = StepResidual::Real;
                out.switched_to_real_at = Some(k);
                state.replace_current_residual(real);
            }
        }

        let (x_tilde, f_tilde) = state.trial(problem);
        let f_c_norm = norm2(state.current().1);
        if f_c_norm > 0.0 {
            contraction = contraction.max(norm2(&f_tilde) / f_c_norm);
        }
        let step = match state.step_with_trial(problem, x_tilde, f_tilde, mode) {
            Ok(s) => s,
            Err(_) => {
                out.status = SolveStatus::NumericalFailure;
                out.solution = state.current().0.to_vec();
                out.final_residual_norm = control;
                out.contraction = Some(contraction);
                return out;
            }
        };
        control = norm2(&step.f_next);
        let mut real = match mode {
            StepResidual::Real => Some(control),
            StepResidual::Control if o.trace_real_residuals => {
                Some(norm2(&problem.residual(&step.x_next)))
            }
            StepResidual::Control => None,
        };
        rec.record(
            control,
            real,
            Some(&step.coeffs),
            step.dropped,
            &step.x_next,
        );
        out.solution = step.x_next;
        out.final_residual_norm = control;
        out.contraction = Some(contraction);

        if !control.is_finite() || !finite(&out.solution) {
            out.status = SolveStatus::NumericalFailure;
            return out;
        }
        if mode == StepResidual::Control && control < o.breakdown_rel_tol * r0 {
            let real_norm = *real.get_or_insert_with(|| norm2(&problem.residual(&out.solution)));
            if real_norm >= o.tol {
                out.status = SolveStatus::Breakdown;
                out.final_residual_norm = real_norm;
                return out;
            }
        }
        if control < o.tol {
            out.status = SolveStatus::Converged;
            return out;
        }
        if rec.stagnating() {
            out.status = SolveStatus::Stagnation;
            return out;
        }
    }
    out.status = SolveStatus::MaxIterations;
    out
}

/// CROP recursion reported along the trial iterates `x̃`; stops as soon as
/// `‖f(x̃)‖ < tol`, before the mixing step.
fn run_crop_anderson(
    problem: &Problem,
    x0: &[f64],
    o: &SolveOptions,
    mode: StepResidual,
    rec: &mut Recorder,
) -> Outcome {
    let mut state = CropState::new(problem, x0.to_vec(), o.depth, o.beta);
    let r0 = norm2(state.current().1);
    rec.record(r0, Some(r0), None, 0, x0);
    if r0 < o.tol {
        return simple_outcome(SolveStatus::Converged, x0.to_vec(), r0);
    }
    let mut contraction: f64 = 0.0;
    let mut last = (x0.to_vec(), r0);

    let finish = |status, (x, r): (Vec<f64>, f64), c: f64| Outcome {
        status,
        solution: x,
        final_residual_norm: r,
        contraction: Some(c),
        switched_to_real_at: None,
    };

    for _ in 0..o.maxit {
        let (x_tilde, f_tilde) = state.trial(problem);
        let rt = norm2(&f_tilde);
        let f_c_norm = norm2(state.current().1);
        if f_c_norm > 0.0 {
            contraction = contraction.max(rt / f_c_norm);
        }
        if !rt.is_finite() || !finite(&x_tilde) {
            rec.record(rt, Some(rt), None, 0, &x_tilde);
            return finish(SolveStatus::NumericalFailure, (x_tilde, rt), contraction);
        }
        if rt < o.tol {
            rec.record(rt, Some(rt), None, 0, &x_tilde);
            return finish(SolveStatus::Converged, (x_tilde, rt), contraction);
        }
        let kept = x_tilde.clone();
        match state.step_with_trial(problem, x_tilde, f_tilde, mode) {
            Ok(step) => rec.record(rt, Some(rt), Some(&step.coeffs), step.dropped, &kept),
            Err(_) => {
                rec.record(rt, Some(rt), None, 0, &kept);
                return finish(SolveStatus::NumericalFailure, (kept, rt), contraction);
            }
        }
        last = (kept, rt);
        if rec.stagnating() {
            return finish(SolveStatus::Stagnation, last, contraction);
        }
    }
    finish(SolveStatus::MaxIterations, last, contraction)
}
