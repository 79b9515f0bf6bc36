use rayon::prelude::*;
use serde::Serialize;

use crate::accel::{solve, SolveReport, SolveStatus};
use crate::krylov::gmres_solve;
use crate::problems::{build_problem, Problem};

use super::config::{ExperimentConfig, MethodSpec};
use super::csv::CsvTrace;
use super::BenchError;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "ACCEL_KIT_THREADS";

/// Worker count from `ACCEL_KIT_THREADS`, defaulting to the available
/// parallelism.
pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub method: String,
    pub m: String,
    pub beta: f64,
    pub status: String,
    pub iterations: usize,
    pub final_residual_norm: f64,
    pub final_real_residual: f64,
    pub q_factor: Option<f64>,
    pub r_factor: Option<f64>,
}

impl RunSummary {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged.name()
    }

    fn from_report(spec: &MethodSpec, report: &SolveReport) -> Self {
        Self {
            method: report.method.name().to_string(),
            m: spec.depth_label(),
            beta: spec.beta,
            status: report.status.name().to_string(),
            iterations: report.iterations,
            final_residual_norm: report.final_residual_norm,
            final_real_residual: report.final_real_residual,
            q_factor: report.diagnostics.as_ref().map(|d| d.q_factor_estimate),
            r_factor: report.diagnostics.as_ref().map(|d| d.r_factor_estimate),
        }
    }

    pub fn line(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        format!(
            "{:<16} m={:<4} beta={:<6} {:<15} iterations={:<5} residual={:.3e} real={:.3e} q={} r={}",
            self.method,
            self.m,
            self.beta,
            self.status,
            self.iterations,
            self.final_residual_norm,
            self.final_real_residual,
            opt(self.q_factor),
            opt(self.r_factor),
        )
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub csv: String,
    /// One entry per configured method, in config order.
    pub summaries: Vec<RunSummary>,
    pub reports: Vec<SolveReport>,
}

impl ExperimentOutput {
    pub fn any_converged(&self) -> bool {
        self.summaries.iter().any(RunSummary::converged)
    }
}

fn run_all(
    problem: &Problem,
    x0: &[f64],
    config: &ExperimentConfig,
) -> Result<Vec<SolveReport>, BenchError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .map_err(|e| BenchError::Config(format!("thread pool: {e}")))?;
    let results: Vec<_> = pool.install(|| {
        config
            .methods
            .par_iter()
            .map(|spec| solve(problem, x0, spec.method, &config.options_for(spec)))
            .collect()
    });
    results
        .into_iter()
        .map(|r| r.map_err(BenchError::from))
        .collect()
}

/// Runs every configured method from the same starting point.
///
/// The CSV holds one block of rows per method, in config order, followed by
/// GMRES rows when `gmres_reference` is set.
pub fn run_experiment(
    config: &ExperimentConfig,
    seed_override: Option<u64>,
) -> Result<ExperimentOutput, BenchError> {
    config.validate()?;
    let problem = build_problem(&config.problem)?;
    let x0 = config.x0.build(problem.dimension(), seed_override)?;

    let reports = run_all(&problem, &x0, config)?;
    let mut csv = CsvTrace::new();
    let mut summaries = Vec::with_capacity(reports.len());
    for (spec, report) in config.methods.iter().zip(&reports) {
        csv.push_report(spec, report);
        summaries.push(RunSummary::from_report(spec, report));
    }

    if config.gmres_reference {
        let (a, b) = problem
            .linear_parts()
            .ok_or_else(|| BenchError::Config("gmres_reference needs a linear problem".into()))?;
        let (_, trace) = gmres_solve(a, b, &x0, config.tol, config.maxit)?;
        let last = trace.residual_norms.len() - 1;
        let status = match trace.status {
            crate::krylov::KrylovStatus::Converged => "converged",
            crate::krylov::KrylovStatus::MaxIterations => "max_iterations",
            crate::krylov::KrylovStatus::Stalled => "stagnation",
        };
        for (k, &r) in trace.residual_norms.iter().enumerate() {
            let s = if k == last { status } else { "iterating" };
            csv.push_row("gmres", "inf", 1.0, k, r, Some(r), s);
        }
    }

    Ok(ExperimentOutput {
        csv: csv.into_string(),
        summaries,
        reports,
    })
}

#[derive(Debug, Clone)]
pub struct Ranking {
    pub output: ExperimentOutput,
    /// Indices into `output.summaries`, best first.
    pub order: Vec<usize>,
}

impl Ranking {
    pub fn lines(&self) -> Vec<String> {
        self.order
            .iter()
            .enumerate()
            .map(|(rank, &i)| format!("{:>2}. {}", rank + 1, self.output.summaries[i].line()))
            .collect()
    }
}

/// Runs at least two methods and ranks them: converged runs first, then by
/// iteration count, then by final real residual. Ties keep config order.
pub fn compare_methods(
    config: &ExperimentConfig,
    seed_override: Option<u64>,
) -> Result<Ranking, BenchError> {
    if config.methods.len() < 2 {
        return Err(BenchError::Config(format!(
            "compare needs at least two methods, got {}",
            config.methods.len()
        )));
    }
    let output = run_experiment(config, seed_override)?;
    let mut order: Vec<usize> = (0..output.summaries.len()).collect();
    order.sort_by(|&a, &b| {
        let (sa, sb) = (&output.summaries[a], &output.summaries[b]);
        (!sa.converged(), sa.iterations)
            .cmp(&(!sb.converged(), sb.iterations))
            .then(sa.final_real_residual.total_cmp(&sb.final_real_residual))
    });
    Ok(Ranking { output, order })
}

/// The only method of a single-run config.
pub fn single_method(config: &ExperimentConfig) -> Result<&MethodSpec, BenchError> {
    match config.methods.as_slice() {
        [one] => Ok(one),
        other => Err(BenchError::Config(format!(
            "expected exactly one method, got {}",
            other.len()
        ))),
    }
}
