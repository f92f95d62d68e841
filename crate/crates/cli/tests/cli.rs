use std::path::Path;
use std::process::{Command, Output};

use fiat_market::engine::{self, StepOutcome};
use fiat_market::{EconomyState, RngStream};
use fiat_market_cli::commands::verify_with;
use fiat_market_cli::csv_io::{read_summary, read_trajectory, TRAJECTORY_HEADER};
use fiat_market_cli::{exit, Options};

fn fiatsim(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fiatsim"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("sim.cfg");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_writes_one_row_per_iteration_and_a_chart() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = fiatsim(
        &["run", "--seed", "42", "--iterations", "100", "--svg"],
        &out,
    );
    assert_eq!(
        o.status.code(),
        Some(exit::OK),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    let text = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(text.lines().next(), Some(TRAJECTORY_HEADER));
    assert_eq!(text.lines().count(), 101);
    let rows = read_trajectory(text.as_bytes()).unwrap();
    assert_eq!(rows.first().unwrap().iteration, 1);
    assert_eq!(rows.last().unwrap().iteration, 100);

    let svg = std::fs::read_to_string(out.join("avg_price.svg")).unwrap();
    let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
    let pts = line
        .split("points=\"")
        .nth(1)
        .unwrap()
        .trim_end_matches("\"/>");
    assert_eq!(pts.split(' ').count(), 100);
    assert!(stdout(&o).contains("convergence:"));
}

#[test]
fn run_refuses_to_overwrite_without_force() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["run", "--iterations", "10"];
    assert_eq!(fiatsim(&args, tmp.path()).status.code(), Some(exit::OK));
    assert_eq!(fiatsim(&args, tmp.path()).status.code(), Some(exit::IO));
    let forced = ["run", "--iterations", "10", "--force"];
    assert_eq!(fiatsim(&forced, tmp.path()).status.code(), Some(exit::OK));
}

#[test]
fn missing_config_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.cfg");
    let o = fiatsim(&["run", "--config", missing.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(exit::CONFIG));
    assert!(!tmp.path().join("trajectory.csv").exists());
}

#[test]
fn invalid_parameters_are_rejected_before_any_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "consume_factor = 1.0\n");
    let o = fiatsim(&["run", "--config", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(exit::CONFIG));
    assert!(String::from_utf8_lossy(&o.stderr).contains("consume_factor"));
    assert!(!tmp.path().join("trajectory.csv").exists());
}

#[test]
fn sweep_summarises_every_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "start_prices = 0.2, 1, 5, 25\nseeds = 1, 2, 3\nn_iterations = 2000\n",
    );
    let out = tmp.path().join("out");
    let o = fiatsim(&["sweep", "--config", &cfg, "--svg"], &out);
    assert_eq!(o.status.code(), Some(exit::OK), "{}", stdout(&o));

    let rows = read_summary(std::fs::File::open(out.join("sweep_summary.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r.converged));
    assert!(out.join("runs").join("start_25_seed_3.csv").exists());
    let svg = std::fs::read_to_string(out.join("sweep_avg_price.svg")).unwrap();
    assert_eq!(
        svg.lines().filter(|l| l.starts_with("<polyline")).count(),
        4
    );
    assert!(stdout(&o).contains("-> PASS"));
}

#[test]
fn zero_tolerance_fails_the_attractor_check() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "start_prices = 0.2, 25\nseeds = 1\nn_iterations = 1500\nattractor_rel_tolerance = 0\n",
    );
    let o = fiatsim(&["sweep", "--config", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(exit::ATTRACTOR));
    assert!(stdout(&o).contains("-> FAIL"));
}

#[test]
fn sweep_shorter_than_the_window_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = fiatsim(&["sweep", "--iterations", "100"], tmp.path());
    assert_eq!(o.status.code(), Some(exit::CONFIG));
    assert!(String::from_utf8_lossy(&o.stderr).contains("convergence_window"));
}

#[test]
fn verify_passes_on_the_real_engine() {
    let tmp = tempfile::tempdir().unwrap();
    let o = fiatsim(&["verify", "--iterations", "500"], tmp.path());
    assert_eq!(o.status.code(), Some(exit::OK));
    assert!(stdout(&o).contains("PASS determinism replay"));
}

/// Production step with one seller credit silently dropped on the first
/// trade after iteration 50.
fn leaky_step(state: &mut EconomyState, rng: &mut RngStream) -> StepOutcome {
    let out = engine::step(state, rng);
    if state.iteration > 50 {
        if let Some(t) = out.trades.first() {
            state.agents[t.seller_id.0].savings -= t.price_paid;
        }
    }
    out
}

#[test]
fn verify_names_the_broken_invariant() {
    let opts = Options {
        iterations: Some(200),
        ..Options::default()
    };
    let err = verify_with(&opts, leaky_step).unwrap_err();
    assert_eq!(err.exit_code(), exit::INVARIANT);
    let msg = err.to_string();
    assert!(msg.contains("money conservation"), "{msg}");
}

#[test]
fn nondeterministic_step_fails_the_replay() {
    use std::sync::atomic::{AtomicU64, Ordering};
    static CALLS: AtomicU64 = AtomicU64::new(0);
    let drifting = |state: &mut EconomyState, rng: &mut RngStream| {
        let out = engine::step(state, rng);
        // second replay perturbs one price by a legal factor
        if CALLS.fetch_add(1, Ordering::Relaxed) == 150 {
            state.agents[0].price *= 1.05;
        }
        out
    };
    let opts = Options {
        iterations: Some(100),
        ..Options::default()
    };
    let err = verify_with(&opts, drifting).unwrap_err();
    assert_eq!(err.exit_code(), exit::INVARIANT);
    assert!(err.to_string().contains("determinism"));
}
