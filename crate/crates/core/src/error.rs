use thiserror::Error;

use crate::params::Violation;

/// Params failed validation; carries every violation, not just the first.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid market parameters: {}", join(.violations))]
pub struct ParamError {
    pub violations: Vec<Violation>,
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Misuse of a pure numeric routine (utility curves, convergence detection).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("{name} must be non-negative (got {value})")]
    Negative { name: &'static str, value: f64 },
    #[error("{name} must be strictly positive (got {value})")]
    NonPositive { name: &'static str, value: f64 },
    #[error("window must be at least 2 (got {0})")]
    WindowTooSmall(usize),
    #[error("series of length {len} is shorter than the window {window}")]
    SeriesTooShort { len: usize, window: usize },
    #[error("need at least 2 converged runs to compare attractors (got {0})")]
    TooFewConverged(usize),
}
