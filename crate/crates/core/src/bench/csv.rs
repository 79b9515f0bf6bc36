use std::fmt::Write;

use crate::accel::SolveReport;

use super::config::MethodSpec;

pub const CSV_HEADER: &str = "method,m,beta,k,control_res_norm,real_res_norm,status";

/// Scientific notation with 17 significant digits, enough to round-trip
/// every `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Accumulates trace rows in the fixed CSV layout.
#[derive(Debug, Clone)]
pub struct CsvTrace {
    text: String,
}

impl Default for CsvTrace {
    fn default() -> Self {
        Self::new()
    }
}

impl CsvTrace {
    pub fn new() -> Self {
        Self {
            text: format!("{CSV_HEADER}\n"),
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push_row(
        &mut self,
        method: &str,
        m: &str,
        beta: f64,
        k: usize,
        control: f64,
        real: Option<f64>,
        status: &str,
    ) {
        let real = real.map(format_float).unwrap_or_default();
        writeln!(
            self.text,
            "{method},{m},{},{k},{},{real},{status}",
            format_float(beta),
            format_float(control)
        )
        .expect("writing to a String cannot fail");
    }

    /// One row per trace record; the last row carries the final status.
    pub fn push_report(&mut self, spec: &MethodSpec, report: &SolveReport) {
        let last = report.trace.len() - 1;
        for (i, rec) in report.trace.iter().enumerate() {
            let status = if i == last {
                report.status.name()
            } else {
                "iterating"
            };
            self.push_row(
                report.method.name(),
                &spec.depth_label(),
                spec.beta,
                rec.k,
                rec.control_res_norm,
                rec.real_res_norm,
                status,
            );
        }
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn into_string(self) -> String {
        self.text
    }
}
