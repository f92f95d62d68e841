//! Sweeps over starting prices and seeds, and the attractor comparison.

use rayon::prelude::*;

use crate::engine::run;
use crate::error::{DomainError, ParamError};
use crate::metrics::{
    detect_convergence, ConvergenceReport, SnapshotRow, DEFAULT_CV_TOLERANCE, DEFAULT_WINDOW,
};
use crate::params::MarketParams;

/// Default bound on the relative spread of settled prices across runs.
pub const DEFAULT_ATTRACTOR_TOLERANCE: f64 = 0.10;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base_params: MarketParams,
    pub start_prices: Vec<f64>,
    pub seeds: Vec<u64>,
    pub n_iterations: u64,
    pub convergence_window: usize,
    pub cv_tolerance: f64,
}

impl SweepSpec {
    /// Four starting prices spanning two orders of magnitude, three seeds.
    pub fn attractor_default() -> Self {
        Self {
            base_params: MarketParams::default(),
            start_prices: vec![0.2, 1.0, 5.0, 25.0],
            seeds: vec![1, 2, 3],
            n_iterations: 5000,
            convergence_window: DEFAULT_WINDOW,
            cv_tolerance: DEFAULT_CV_TOLERANCE,
        }
    }

    pub fn problems(&self) -> Vec<String> {
        let mut out = self.shape_problems();
        if self.convergence_window >= 2 && (self.n_iterations as usize) < self.convergence_window {
            out.push(format!(
                "n_iterations {} is shorter than convergence_window {}",
                self.n_iterations, self.convergence_window
            ));
        }
        out
    }

    /// Problems that matter even for a single run, where a series shorter
    /// than the window just leaves convergence unevaluated.
    pub fn shape_problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.start_prices.is_empty() {
            out.push("start_prices must not be empty".to_owned());
        }
        if self.seeds.is_empty() {
            out.push("seeds must not be empty".to_owned());
        }
        for p in &self.start_prices {
            if !(p.is_finite() && *p > 0.0) {
                out.push(format!("start price {p} must be finite and > 0"));
            }
        }
        if self.n_iterations < 1 {
            out.push("n_iterations must be >= 1".to_owned());
        }
        if self.convergence_window < 2 {
            out.push("convergence_window must be >= 2".to_owned());
        }
        out
    }

    /// All (start_price, seed) pairs in report order.
    pub fn pairs(&self) -> Vec<(f64, u64)> {
        let mut pairs: Vec<(f64, u64)> = self
            .start_prices
            .iter()
            .flat_map(|&p| self.seeds.iter().map(move |&s| (p, s)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        pairs
    }
}

/// Why a single run produced no convergence report.
#[derive(Debug, Clone, PartialEq)]
pub enum RunFailure {
    Params(ParamError),
    Convergence(DomainError),
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunFailure::Params(e) => e.fmt(f),
            RunFailure::Convergence(e) => e.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub convergence: ConvergenceReport,
    pub snapshots: Vec<SnapshotRow>,
}

impl RunSummary {
    pub fn avg_price(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.avg_price).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRun {
    pub start_price: f64,
    pub seed: u64,
    pub outcome: Result<RunSummary, RunFailure>,
}

impl SweepRun {
    pub fn convergence(&self) -> Option<&ConvergenceReport> {
        self.outcome.as_ref().ok().map(|s| &s.convergence)
    }

    pub fn settled_value(&self) -> Option<f64> {
        self.convergence().and_then(|c| c.settled_value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    /// Ordered by (start_price, seed).
    pub runs: Vec<SweepRun>,
    /// `(max - min) / mean` of settled values; `None` with fewer than two
    /// converged runs.
    pub attractor_spread: Option<f64>,
    pub all_converged: bool,
}

impl SweepReport {
    pub fn settled_values(&self) -> Vec<f64> {
        self.runs
            .iter()
            .filter_map(SweepRun::settled_value)
            .collect()
    }
}

/// Runs one simulation per (start_price, seed) pair, in parallel. Each run
/// owns its random stream, so results do not depend on scheduling.
pub fn run_sweep(spec: &SweepSpec) -> SweepReport {
    let runs: Vec<SweepRun> = spec
        .pairs()
        .into_par_iter()
        .map(|(start_price, seed)| single_run(spec, start_price, seed))
        .collect();
    assemble(runs)
}

/// Same as [`run_sweep`] on the current thread only.
pub fn run_sweep_sequential(spec: &SweepSpec) -> SweepReport {
    let runs = spec
        .pairs()
        .into_iter()
        .map(|(start_price, seed)| single_run(spec, start_price, seed))
        .collect();
    assemble(runs)
}

fn single_run(spec: &SweepSpec, start_price: f64, seed: u64) -> SweepRun {
    let params = MarketParams {
        initial_price: start_price,
        ..spec.base_params.clone()
    };
    let outcome = run(&params, seed, spec.n_iterations)
        .map_err(RunFailure::Params)
        .and_then(|out| {
            detect_convergence(
                &out.avg_price_series(),
                spec.convergence_window,
                spec.cv_tolerance,
            )
            .map(|convergence| RunSummary {
                convergence,
                snapshots: out.snapshots,
            })
            .map_err(RunFailure::Convergence)
        });
    SweepRun {
        start_price,
        seed,
        outcome,
    }
}

fn assemble(runs: Vec<SweepRun>) -> SweepReport {
    let all_converged = runs
        .iter()
        .all(|r| r.convergence().is_some_and(|c| c.converged));
    let settled: Vec<f64> = runs.iter().filter_map(SweepRun::settled_value).collect();
    let attractor_spread = relative_spread(&settled);
    SweepReport {
        runs,
        attractor_spread,
        all_converged,
    }
}

fn relative_spread(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Some((max - min) / mean)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttractorVerdict {
    pub passed: bool,
    pub spread: f64,
}

/// Passes when the settled prices of all converged runs lie within
/// `rel_tolerance` of each other, relative to their mean.
pub fn compare_attractors(
    report: &SweepReport,
    rel_tolerance: f64,
) -> Result<AttractorVerdict, DomainError> {
    compare_settled(&report.settled_values(), rel_tolerance)
}

pub fn compare_settled(
    settled: &[f64],
    rel_tolerance: f64,
) -> Result<AttractorVerdict, DomainError> {
    let spread = relative_spread(settled).ok_or(DomainError::TooFewConverged(settled.len()))?;
    Ok(AttractorVerdict {
        passed: spread < rel_tolerance,
        spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> SweepSpec {
        SweepSpec {
            start_prices: vec![5.0, 1.0],
            seeds: vec![3, 1, 2],
            n_iterations: 400,
            convergence_window: 100,
            ..SweepSpec::attractor_default()
        }
    }

    #[test]
    fn cartesian_product_in_sorted_order() {
        let spec = SweepSpec {
            start_prices: vec![25.0, 0.2, 5.0, 1.0],
            n_iterations: 200,
            convergence_window: 100,
            ..SweepSpec::attractor_default()
        };
        let report = run_sweep(&spec);
        assert_eq!(report.runs.len(), 12);
        let keys: Vec<_> = report
            .runs
            .iter()
            .map(|r| (r.start_price, r.seed))
            .collect();
        assert_eq!(keys[0], (0.2, 1));
        assert_eq!(keys[2], (0.2, 3));
        assert_eq!(keys[11], (25.0, 3));
    }

    #[test]
    fn single_pair_reduces_to_one_report() {
        let spec = SweepSpec {
            start_prices: vec![1.0],
            seeds: vec![7],
            ..small_spec()
        };
        let report = run_sweep(&spec);
        assert_eq!(report.runs.len(), 1);
        assert!(report.runs[0].convergence().is_some());
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let spec = small_spec();
        assert_eq!(run_sweep(&spec), run_sweep_sequential(&spec));
    }

    #[test]
    fn runs_are_isolated() {
        let full = run_sweep(&small_spec());
        let reduced = run_sweep(&SweepSpec {
            seeds: vec![2],
            ..small_spec()
        });
        for r in &reduced.runs {
            let twin = full
                .runs
                .iter()
                .find(|f| f.start_price == r.start_price && f.seed == r.seed)
                .unwrap();
            assert_eq!(twin, r);
        }
    }

    #[test]
    fn invalid_params_are_flagged_not_fatal() {
        let spec = SweepSpec {
            start_prices: vec![-1.0, 1.0],
            seeds: vec![1],
            ..small_spec()
        };
        let report = run_sweep(&spec);
        assert!(matches!(report.runs[0].outcome, Err(RunFailure::Params(_))));
        assert!(report.runs[1].outcome.is_ok());
        assert!(!report.all_converged);
        assert_eq!(report.attractor_spread, None);
        assert!(!spec.problems().is_empty());
    }

    #[test]
    fn spec_problems() {
        assert!(SweepSpec::attractor_default().problems().is_empty());
        let bad = SweepSpec {
            start_prices: vec![],
            seeds: vec![],
            n_iterations: 10,
            ..SweepSpec::attractor_default()
        };
        assert_eq!(bad.problems().len(), 3);
    }

    #[test]
    fn compare_examples() {
        let v = compare_settled(&[2.0, 2.0, 2.0], 0.1).unwrap();
        assert!(v.passed);
        assert_eq!(v.spread, 0.0);

        let v = compare_settled(&[1.0, 3.0], 0.1).unwrap();
        assert!(!v.passed);
        assert_eq!(v.spread, 1.0);

        let v = compare_settled(&[2.0, 2.1], 0.10).unwrap();
        assert!(v.passed);
        assert!((v.spread - 0.1 / 2.05).abs() < 1e-12);
        assert!((v.spread - 0.0488).abs() < 1e-4);

        assert_eq!(
            compare_settled(&[1.0], 0.1),
            Err(DomainError::TooFewConverged(1))
        );
    }

    #[test]
    fn zero_tolerance_never_passes_distinct_values() {
        let v = compare_settled(&[2.0, 2.000001], 0.0).unwrap();
        assert!(!v.passed);
    }
}
