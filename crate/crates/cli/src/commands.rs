use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use fiat_market::audit::{audited_run, AuditError};
use fiat_market::config::ConfigError;
use fiat_market::engine::{self, StepOutcome};
use fiat_market::experiment::{compare_attractors, run_sweep};
use fiat_market::metrics::detect_convergence;
use fiat_market::{EconomyState, RngStream, SimConfig};
use thiserror::Error;

use crate::csv_io;
use crate::svg::{line_chart, Chart, Series, YScale};

/// Process exit codes. Stable; scripts may gate on them.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const IO: i32 = 2;
    pub const ATTRACTOR: i32 = 3;
    pub const INVARIANT: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Io(String),
    #[error("attractor comparison failed: {0}")]
    Attractor(String),
    #[error("invariant violated at {0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Io(_) => exit::IO,
            CliError::Attractor(_) => exit::ATTRACTOR,
            CliError::Invariant(_) => exit::INVARIANT,
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub iterations: Option<u64>,
    pub svg: bool,
    pub force: bool,
}

impl Options {
    /// Loads the config file (or defaults) and applies flag overrides.
    pub fn load(&self) -> Result<SimConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => SimConfig::from_file(path)?,
            None => SimConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seeds = vec![seed];
        }
        if let Some(n) = self.iterations {
            config.n_iterations = n;
        }
        Ok(config.validated()?)
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Refuses to clobber existing files unless `force` is set, then creates
/// the directories the outputs need.
fn prepare_outputs(paths: &[PathBuf], force: bool) -> Result<(), CliError> {
    if !force {
        if let Some(existing) = paths.iter().find(|p| p.exists()) {
            return Err(CliError::Io(format!(
                "refusing to overwrite {} (pass --force to replace it)",
                existing.display()
            )));
        }
    }
    for p in paths {
        if let Some(dir) = p.parent() {
            std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        }
    }
    Ok(())
}

fn write_file(
    path: &Path,
    fill: impl FnOnce(&mut BufWriter<File>) -> Result<(), String>,
) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    fill(&mut w).map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const TRADES_FILE: &str = "trades.csv";
pub const RUN_CHART_FILE: &str = "avg_price.svg";
pub const SUMMARY_FILE: &str = "sweep_summary.csv";
pub const SWEEP_CHART_FILE: &str = "sweep_avg_price.svg";
pub const SWEEP_RUNS_DIR: &str = "runs";

pub fn sweep_run_file(start_price: f64, seed: u64) -> String {
    format!("start_{start_price}_seed_{seed}.csv")
}

/// Single run: trajectory and trades CSVs, optional chart, convergence
/// summary on stdout.
pub fn cmd_run(opts: &Options) -> Result<(), CliError> {
    let config = opts.load()?;
    let seed = config.primary_seed();
    let out = engine::run(&config.params, seed, config.n_iterations)
        .map_err(|e| CliError::Config(ConfigError::Invalid(vec![e.to_string()])))?;

    let trajectory = opts.out.join(TRAJECTORY_FILE);
    let trades = opts.out.join(TRADES_FILE);
    let chart = opts.out.join(RUN_CHART_FILE);
    let mut targets = vec![trajectory.clone(), trades.clone()];
    if opts.svg {
        targets.push(chart.clone());
    }
    prepare_outputs(&targets, opts.force)?;

    write_file(&trajectory, |w| {
        csv_io::write_trajectory(w, &out.snapshots).map_err(|e| e.to_string())
    })?;
    write_file(&trades, |w| {
        csv_io::write_trades(w, &out.trades).map_err(|e| e.to_string())
    })?;
    if opts.svg {
        let series = Series {
            label: format!("seed {seed}"),
            points: out
                .snapshots
                .iter()
                .map(|s| (s.iteration as f64, s.avg_price))
                .collect(),
        };
        let title = format!(
            "Average selling price, start {}",
            config.params.initial_price
        );
        let svg = line_chart(
            &Chart {
                title: &title,
                x_label: "iteration",
                y_label: "average selling price",
                y_scale: YScale::Linear,
            },
            &[series],
        );
        write_file(&chart, |w| {
            w.write_all(svg.as_bytes()).map_err(|e| e.to_string())
        })?;
    }

    println!(
        "run: seed {seed}, {} iterations, {} trades",
        config.n_iterations,
        out.trades.len()
    );
    let series = out.avg_price_series();
    match detect_convergence(
        &series,
        config.convergence_window,
        config.convergence_cv_tolerance,
    ) {
        Ok(report) => {
            println!(
                "convergence: converged={} trailing_cv={:.6} settle_iteration={}",
                report.converged, report.trailing_cv, report.settle_iteration
            );
            if let Some(v) = report.settled_value {
                println!("settled average price: {v:.6}");
            }
        }
        Err(e) => println!("convergence: not evaluated ({e})"),
    }
    Ok(())
}

/// Sweep over start prices and seeds; fails with the attractor exit code
/// when the settled prices disagree.
pub fn cmd_sweep(opts: &Options) -> Result<(), CliError> {
    let config = opts.load()?;
    let spec = config.sweep_spec();
    let problems = spec.problems();
    if !problems.is_empty() {
        return Err(ConfigError::Invalid(problems).into());
    }
    let report = run_sweep(&spec);

    let summary = opts.out.join(SUMMARY_FILE);
    let runs_dir = opts.out.join(SWEEP_RUNS_DIR);
    let chart = opts.out.join(SWEEP_CHART_FILE);
    let mut targets = vec![summary.clone()];
    targets.extend(
        report
            .runs
            .iter()
            .filter(|r| r.outcome.is_ok())
            .map(|r| runs_dir.join(sweep_run_file(r.start_price, r.seed))),
    );
    if opts.svg {
        targets.push(chart.clone());
    }
    prepare_outputs(&targets, opts.force)?;

    let rows = csv_io::summary_rows(&report);
    write_file(&summary, |w| {
        csv_io::write_summary(w, &rows).map_err(|e| e.to_string())
    })?;
    for run in &report.runs {
        match &run.outcome {
            Ok(summary) => {
                let path = runs_dir.join(sweep_run_file(run.start_price, run.seed));
                write_file(&path, |w| {
                    csv_io::write_trajectory(w, &summary.snapshots).map_err(|e| e.to_string())
                })?;
            }
            Err(e) => eprintln!(
                "run start_price={} seed={} failed: {e}",
                run.start_price, run.seed
            ),
        }
    }

    if opts.svg {
        // one curve per start price, from the first seed that ran
        let mut starts = spec.start_prices.clone();
        starts.sort_by(f64::total_cmp);
        starts.dedup();
        let mut series: Vec<Series> = Vec::new();
        for start in starts {
            let first = report
                .runs
                .iter()
                .find(|r| r.start_price == start && r.outcome.is_ok());
            if let Some(Ok(summary)) = first.map(|r| &r.outcome) {
                series.push(Series {
                    label: format!("start {start}"),
                    points: summary
                        .snapshots
                        .iter()
                        .map(|s| (s.iteration as f64, s.avg_price))
                        .collect(),
                });
            }
        }
        let svg = line_chart(
            &Chart {
                title: "Average selling price by starting price",
                x_label: "iteration",
                y_label: "average selling price (log scale)",
                y_scale: YScale::Log10,
            },
            &series,
        );
        write_file(&chart, |w| {
            w.write_all(svg.as_bytes()).map_err(|e| e.to_string())
        })?;
    }

    for row in &rows {
        println!(
            "start {:>8} seed {:>4}  converged={:<5} settled={} cv={}",
            row.start_price,
            row.seed,
            row.converged,
            row.settled_value.map_or("-".into(), |v| format!("{v:.6}")),
            row.trailing_cv.map_or("-".into(), |v| format!("{v:.6}")),
        );
    }
    let tolerance = config.attractor_rel_tolerance;
    match compare_attractors(&report, tolerance) {
        Ok(verdict) => {
            println!(
                "attractor_spread: {:.6} (tolerance {tolerance}) -> {}",
                verdict.spread,
                if verdict.passed { "PASS" } else { "FAIL" }
            );
            if verdict.passed {
                Ok(())
            } else {
                Err(CliError::Attractor(format!(
                    "spread {} is not below {tolerance}",
                    verdict.spread
                )))
            }
        }
        Err(e) => {
            println!("attractor_spread: undefined -> FAIL");
            Err(CliError::Attractor(e.to_string()))
        }
    }
}

/// Invariant audit with the production step function.
pub fn cmd_verify(opts: &Options) -> Result<(), CliError> {
    verify_with(opts, engine::step)
}

/// Runs the configured trajectory twice through `step_fn`, auditing every
/// iteration, then compares both runs' CSV encodings byte for byte.
pub fn verify_with<F>(opts: &Options, step_fn: F) -> Result<(), CliError>
where
    F: FnMut(&mut EconomyState, &mut RngStream) -> StepOutcome + Clone,
{
    let config = opts.load()?;
    let seed = config.primary_seed();
    let audit = |f: F| {
        audited_run(&config.params, seed, config.n_iterations, f).map_err(|e| match e {
            AuditError::Params(p) => CliError::Config(ConfigError::Invalid(vec![p.to_string()])),
            AuditError::Violated(v) => {
                println!(
                    "FAIL {} at iteration {}: {}",
                    v.violation.name(),
                    v.iteration,
                    v.violation
                );
                CliError::Invariant(v.to_string())
            }
        })
    };
    let first = audit(step_fn.clone())?;
    println!(
        "PASS invariants over {} iterations (seed {seed})",
        config.n_iterations
    );
    let second = audit(step_fn)?;

    let same_trajectory =
        csv_io::trajectory_bytes(&first.snapshots) == csv_io::trajectory_bytes(&second.snapshots);
    let same_trades = csv_io::trades_bytes(&first.trades) == csv_io::trades_bytes(&second.trades);
    if !(same_trajectory && same_trades) {
        let iteration = first
            .snapshots
            .iter()
            .zip(&second.snapshots)
            .find(|(a, b)| a != b)
            .map_or(0, |(a, _)| a.iteration);
        println!("FAIL determinism replay at iteration {iteration}");
        return Err(CliError::Invariant(format!(
            "iteration {iteration}: determinism replay produced different output"
        )));
    }
    println!("PASS determinism replay");
    Ok(())
}
