use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::accel::{Depth, Method, ResidualMode, SolveOptions};
use crate::problems::ProblemSpec;
use crate::rng::SplitMix64;

use super::BenchError;

fn default_tol() -> f64 {
    1e-10
}
fn default_maxit() -> usize {
    100
}
fn default_beta() -> f64 {
    1.0
}
fn default_depth() -> Depth {
    Depth::Finite(1)
}

/// Starting vector of a run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialGuess {
    #[default]
    Zeros,
    Ones,
    Explicit {
        values: Vec<f64>,
    },
    /// Components uniform in `[low, high)` from a seeded SplitMix64 stream.
    Random {
        #[serde(default)]
        seed: Option<u64>,
        low: f64,
        high: f64,
    },
}

impl InitialGuess {
    /// Materializes the vector; `seed_override` replaces a configured seed.
    pub fn build(&self, n: usize, seed_override: Option<u64>) -> Result<Vec<f64>, BenchError> {
        match self {
            InitialGuess::Zeros => Ok(vec![0.0; n]),
            InitialGuess::Ones => Ok(vec![1.0; n]),
            InitialGuess::Explicit { values } => {
                if values.len() != n {
                    return Err(BenchError::Config(format!(
                        "x0 has {} entries, problem dimension is {n}",
                        values.len()
                    )));
                }
                Ok(values.clone())
            }
            InitialGuess::Random { seed, low, high } => {
                let seed = seed_override.or(*seed).ok_or_else(|| {
                    BenchError::Config("random x0 needs a seed (config or --seed)".into())
                })?;
                if low.is_nan() || high.is_nan() || low >= high {
                    return Err(BenchError::Config("random x0 needs low < high".into()));
                }
                Ok(SplitMix64::new(seed).uniform_vec(n, *low, *high))
            }
        }
    }
}

/// One method entry of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    pub method: Method,
    #[serde(default = "default_depth")]
    pub depth: Depth,
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Overrides the residual stream of `crop` / `crop_anderson`.
    #[serde(default)]
    pub residual_mode: Option<ResidualMode>,
}

impl MethodSpec {
    pub fn new(method: Method, depth: Depth) -> Self {
        Self {
            method,
            depth,
            beta: 1.0,
            residual_mode: None,
        }
    }

    /// Value of the CSV `m` column.
    pub fn depth_label(&self) -> String {
        if self.method.uses_depth() {
            self.depth.to_string()
        } else {
            "0".into()
        }
    }
}

/// Parameters of the r-factor sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub angle_samples: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "sweep_low")]
    pub low: f64,
    #[serde(default = "sweep_high")]
    pub high: f64,
}

fn sweep_low() -> f64 {
    -0.5
}
fn sweep_high() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    #[serde(default)]
    pub methods: Vec<MethodSpec>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_maxit")]
    pub maxit: usize,
    #[serde(default)]
    pub x0: InitialGuess,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Append full GMRES rows (linear problems only).
    #[serde(default)]
    pub gmres_reference: bool,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        serde_json::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(BenchError::Config("tol must be positive".into()));
        }
        if self.maxit == 0 {
            return Err(BenchError::Config("maxit must be at least 1".into()));
        }
        for m in &self.methods {
            self.options_for(m)
                .validate()
                .map_err(|e| BenchError::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn options_for(&self, spec: &MethodSpec) -> SolveOptions {
        SolveOptions {
            depth: spec.depth,
            beta: spec.beta,
            tol: self.tol,
            maxit: self.maxit,
            residual_mode: spec.residual_mode.unwrap_or_default(),
            ..SolveOptions::default()
        }
    }
}
