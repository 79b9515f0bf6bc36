use std::f64::consts::FRAC_PI_2;
use std::fmt::Write;

use crate::accel::{solve, Depth};
use crate::problems::build_problem;
use crate::rng::SplitMix64;

use super::config::ExperimentConfig;
use super::csv::format_float;
use super::BenchError;

/// r-factor of one method from one starting point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sample: usize,
    /// Direction of `x0` folded into `(−π/2, π/2]`.
    pub angle: f64,
    pub method: String,
    pub m: String,
    pub r_factor: f64,
    pub iterations: usize,
    pub status: String,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    /// `sample,angle,method,m,r_factor,iterations,status`
    pub csv: String,
    /// Per-iteration mixing coefficient of every depth-1 method:
    /// `sample,method,m,k,gamma`.
    pub gamma_csv: String,
}

/// Direction of a planar vector, folded so that `v` and `−v` agree.
pub fn folded_angle(x: f64, y: f64) -> f64 {
    let mut a = y.atan2(x);
    if a > FRAC_PI_2 {
        a -= std::f64::consts::PI;
    } else if a <= -FRAC_PI_2 {
        a += std::f64::consts::PI;
    }
    a
}

/// Runs every configured method from `angle_samples` random starting points
/// of a two-dimensional problem and records the observed r-factors.
pub fn rfactor_sweep(
    config: &ExperimentConfig,
    seed_override: Option<u64>,
) -> Result<SweepOutput, BenchError> {
    config.validate()?;
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| BenchError::Config("rfactor-sweep needs a `sweep` section".into()))?;
    if config.methods.is_empty() {
        return Err(BenchError::Config(
            "rfactor-sweep needs at least one method".into(),
        ));
    }
    let seed = seed_override.or(sweep.seed).ok_or_else(|| {
        BenchError::Config("rfactor-sweep needs a seed (config or --seed)".into())
    })?;
    let problem = build_problem(&config.problem)?;
    if problem.dimension() != 2 {
        return Err(BenchError::Config(format!(
            "rfactor-sweep needs a two-dimensional problem, got dimension {}",
            problem.dimension()
        )));
    }

    let mut rng = SplitMix64::new(seed);
    let mut rows = Vec::new();
    let mut csv = String::from("sample,angle,method,m,r_factor,iterations,status\n");
    let mut gamma_csv = String::from("sample,method,m,k,gamma\n");
    for sample in 0..sweep.angle_samples {
        let x0 = rng.uniform_vec(2, sweep.low, sweep.high);
        let angle = folded_angle(x0[0], x0[1]);
        for spec in &config.methods {
            let report = solve(&problem, &x0, spec.method, &config.options_for(spec))?;
            let r_factor = report.diagnostics.map_or(f64::NAN, |d| d.r_factor_estimate);
            let row = SweepRow {
                sample,
                angle,
                method: report.method.name().to_string(),
                m: spec.depth_label(),
                r_factor,
                iterations: report.iterations,
                status: report.status.name().to_string(),
            };
            writeln!(
                csv,
                "{},{},{},{},{},{},{}",
                row.sample,
                format_float(row.angle),
                row.method,
                row.m,
                format_float(row.r_factor),
                row.iterations,
                row.status
            )
            .expect("writing to a String cannot fail");
            if spec.method.uses_depth() && spec.depth == Depth::Finite(1) {
                for rec in &report.trace {
                    if let Some(g) = rec.gamma.first() {
                        writeln!(
                            gamma_csv,
                            "{sample},{},1,{},{}",
                            row.method,
                            rec.k,
                            format_float(*g)
                        )
                        .expect("writing to a String cannot fail");
                    }
                }
            }
            rows.push(row);
        }
    }
    Ok(SweepOutput {
        rows,
        csv,
        gamma_csv,
    })
}
