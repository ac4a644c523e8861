//! Pipeline orchestration for the analytic-content toolkit: configuration
//! parsing, command runners, report emission and the built-in verification
//! suite.

pub mod commands;
pub mod config;
pub mod report;
pub mod suite;

use std::fmt;

/// Failure classification mapped onto process exit codes:
/// 1 = a verification check failed, 2 = invalid configuration or input,
/// 3 = solver non-convergence.
#[derive(Debug)]
pub enum Failure {
    Check {
        check: String,
        margin: f64,
        detail: String,
    },
    Config(String),
    Solver(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Check { .. } => 1,
            Failure::Config(_) => 2,
            Failure::Solver(_) => 3,
        }
    }

    /// Machine-readable reason object for stderr and failure artifacts.
    pub fn reason_json(&self) -> serde_json::Value {
        match self {
            Failure::Check {
                check,
                margin,
                detail,
            } => serde_json::json!({
                "error": {"kind": "check_failed", "check": check, "margin": margin, "detail": detail}
            }),
            Failure::Config(msg) => {
                serde_json::json!({"error": {"kind": "invalid_config", "detail": msg}})
            }
            Failure::Solver(msg) => {
                serde_json::json!({"error": {"kind": "solver_failure", "detail": msg}})
            }
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Check {
                check,
                margin,
                detail,
            } => write!(f, "check '{check}' failed by {margin:.3e}: {detail}"),
            Failure::Config(msg) => write!(f, "invalid config: {msg}"),
            Failure::Solver(msg) => write!(f, "solver failure: {msg}"),
        }
    }
}

impl From<anacon_core::Error> for Failure {
    fn from(e: anacon_core::Error) -> Self {
        match e {
            anacon_core::Error::NonConvergence { .. } => Failure::Solver(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;
