use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the lab.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("infeasible relaxation rate s_J = {value} (must lie in {bound})")]
    Infeasible { value: f64, bound: &'static str },

    #[error("explicit heat step unstable: dt = {dt} exceeds dx^2/(4 kappa) = {bound}")]
    HeatStability { dt: f64, bound: f64 },

    #[error("staggered step violates CFL: c0 dt sqrt(2)/dx = {number} > 1")]
    Cfl { number: f64 },

    #[error("amplification eigenvalue {index} is zero; no logarithmic rate exists")]
    Branch { index: usize },

    #[error("eigenvalue solver failed to converge")]
    Eigen,

    #[error("{0}")]
    Domain(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("need at least {needed} points for an order fit, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("error values must be strictly positive for an order fit (got {0})")]
    NonPositiveError(f64),

    #[error("configuration invalid:\n{}", format_issues(.0))]
    Config(Vec<ConfigIssue>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

/// One violation found while validating a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    /// 1-based line number, or 0 when the issue is not tied to a line.
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

fn format_issues(issues: &[ConfigIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> LabError {
    LabError::Parameter {
        name,
        reason: reason.into(),
    }
}
