use serde::Serialize;

use crate::linalg::{dot, norm2, MixingCoefficients};

use super::AccelError;

/// Measured convergence rates of a residual-norm trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceDiagnostics {
    /// Largest ratio of consecutive residual norms.
    pub q_factor_estimate: f64,
    /// Geometric mean rate `(last/first)^(1/K)`.
    pub r_factor_estimate: f64,
    /// Largest observed `‖f̃⁽ᵏ⁺¹⁾‖/‖f_C⁽ᵏ⁾‖` on CROP runs; equals a lower
    /// bound of `‖I − A‖₂` on linear problems.
    pub contraction_estimate: Option<f64>,
}

/// `(a, b)/(‖a‖‖b‖)`, clamped to `[−1, 1]`.
pub fn cos_theta(a: &[f64], b: &[f64]) -> Result<f64, AccelError> {
    let na = norm2(a);
    let nb = norm2(b);
    if na == 0.0 || nb == 0.0 {
        return Err(AccelError::ZeroVector);
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

pub fn estimate_convergence_factors(trace: &[f64]) -> Result<ConvergenceDiagnostics, AccelError> {
    if trace.len() < 2 {
        return Err(AccelError::DegenerateTrace(trace.len()));
    }
    let q = trace
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max);
    let k = (trace.len() - 1) as f64;
    let r = (trace[trace.len() - 1] / trace[0]).powf(1.0 / k);
    Ok(ConvergenceDiagnostics {
        q_factor_estimate: q,
        r_factor_estimate: r,
        contraction_estimate: None,
    })
}

/// Tracks how each CROP iterate is built from the trial iterates
/// `x⁽⁰⁾, x̃⁽¹⁾, …, x̃⁽ᵏ⁾`.
///
/// `x_C⁽ᵏ⁾ = Σⱼ sⱼ⁽ᵏ⁾·x̃⁽ʲ⁾`; the returned value for step `k` is `Σⱼ |sⱼ⁽ᵏ⁾|`,
/// which stays bounded whenever the mixing weights are well behaved.
/// `history[i]` holds the coefficients that produced `x_C⁽ⁱ⁺¹⁾`.
pub fn assumption_m_estimate(history: &[MixingCoefficients]) -> Vec<f64> {
    let mut columns: Vec<Vec<f64>> = vec![vec![1.0]];
    for (i, c) in history.iter().enumerate() {
        let k = i + 1;
        let alpha = &c.alpha;
        let mk = alpha.len() - 1;
        let mut s = vec![0.0; k + 1];
        for (j, &a) in alpha[..mk].iter().enumerate() {
            let src = &columns[k - mk + j];
            for (t, v) in src.iter().enumerate() {
                s[t] += a * v;
            }
        }
        s[k] += alpha[mk];
        columns.push(s);
    }
    columns
        .iter()
        .map(|s| s.iter().map(|v| v.abs()).sum())
        .collect()
}
