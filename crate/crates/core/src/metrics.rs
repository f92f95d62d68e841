//! Per-iteration aggregates and convergence detection on the price series.

use serde::{Deserialize, Serialize};

use crate::economy::EconomyState;
use crate::error::DomainError;

/// Default trailing window for [`detect_convergence`].
pub const DEFAULT_WINDOW: usize = 500;
/// Default coefficient-of-variation tolerance for [`detect_convergence`].
pub const DEFAULT_CV_TOLERANCE: f64 = 0.02;

/// Aggregates of one iteration. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRow {
    pub iteration: u64,
    pub avg_price: f64,
    pub min_price: f64,
    pub max_price: f64,
    pub total_money: f64,
    pub total_stock_for_sale: f64,
    pub total_consumable: f64,
    pub trades: u64,
    pub discarded_production: f64,
}

/// Unweighted mean of every agent's advertised price.
pub fn average_selling_price(state: &EconomyState) -> f64 {
    let sum: f64 = state.agents.iter().map(|a| a.price).sum();
    sum / state.agents.len() as f64
}

pub fn total_money(state: &EconomyState) -> f64 {
    state.agents.iter().map(|a| a.savings).sum()
}

pub fn record_snapshot(state: &EconomyState, trades: u64, discarded: f64) -> SnapshotRow {
    let (min_price, max_price) = state
        .agents
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| {
            (lo.min(a.price), hi.max(a.price))
        });
    SnapshotRow {
        iteration: state.iteration,
        avg_price: average_selling_price(state),
        min_price,
        max_price,
        total_money: total_money(state),
        total_stock_for_sale: state.agents.iter().map(|a| a.stock_for_sale).sum(),
        total_consumable: state.agents.iter().map(|a| a.consumable).sum(),
        trades,
        discarded_production: discarded,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub converged: bool,
    /// Mean of the trailing window; `None` unless converged.
    pub settled_value: Option<f64>,
    /// First index from which every trailing window meets the tolerance.
    /// Equal to the series length when the final window does not.
    pub settle_iteration: usize,
    pub trailing_cv: f64,
}

/// Trailing-window coefficient of variation test.
///
/// The series has converged when the population standard deviation over
/// its last `window` values, divided by their mean, is below
/// `cv_tolerance`.
pub fn detect_convergence(
    series: &[f64],
    window: usize,
    cv_tolerance: f64,
) -> Result<ConvergenceReport, DomainError> {
    if window < 2 {
        return Err(DomainError::WindowTooSmall(window));
    }
    if series.len() < window {
        return Err(DomainError::SeriesTooShort {
            len: series.len(),
            window,
        });
    }

    // Rolling sums over each window. Values are re-centred on the first
    // element so that the sum of squares does not lose precision on series
    // with a large mean and a small spread.
    let shift = series[0];
    let n = window as f64;
    let (mut sum, mut sum_sq) = series[..window].iter().fold((0.0, 0.0), |(s, q), &x| {
        let d = x - shift;
        (s + d, q + d * d)
    });
    let window_cv = |sum: f64, sum_sq: f64| {
        let mean_d = sum / n;
        let var = (sum_sq / n - mean_d * mean_d).max(0.0);
        let mean = shift + mean_d;
        if mean == 0.0 {
            if var == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            var.sqrt() / mean.abs()
        }
    };

    let n_windows = series.len() - window + 1;
    let mut passes = Vec::with_capacity(n_windows);
    passes.push(window_cv(sum, sum_sq) < cv_tolerance);
    for end in window..series.len() {
        let add = series[end] - shift;
        let drop = series[end - window] - shift;
        sum += add - drop;
        sum_sq += add * add - drop * drop;
        passes.push(window_cv(sum, sum_sq) < cv_tolerance);
    }

    // The final window is recomputed exactly so that drift in the rolling
    // sums cannot affect the headline numbers.
    let tail = &series[series.len() - window..];
    let (mean, cv) = mean_and_cv(tail);
    let converged = cv < cv_tolerance;

    let settle_iteration = if converged {
        let first_failing_from_end = passes[..n_windows - 1].iter().rposition(|ok| !ok);
        first_failing_from_end.map_or(0, |i| i + 1)
    } else {
        series.len()
    };

    Ok(ConvergenceReport {
        converged,
        settled_value: converged.then_some(mean),
        settle_iteration,
        trailing_cv: cv,
    })
}

/// Mean and population coefficient of variation.
pub(crate) fn mean_and_cv(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let cv = if mean == 0.0 {
        if var == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        var.sqrt() / mean.abs()
    };
    (mean, cv)
}
