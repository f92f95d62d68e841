//! Agent-based simulation of price formation in a single-good economy
//! that trades with fiat money.
//!
//! Every agent produces goods it cannot consume itself, sells them from
//! its own shop at a price of its choosing, and buys from others whenever
//! doing so raises its wellbeing. Savings are valued in days of
//! consumption at the prevailing price level, which closes the loop
//! between prices and the willingness to spend. The average price then
//! settles on a level that does not depend on where it started.
//!
//! Each iteration runs four phases in order (see [`engine::step`]):
//! produce, consume, purchase, reprice.

// `!(x >= 0.0)` is used on purpose so that NaN fails bound checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod config;
pub mod economy;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod params;
pub mod rng;
pub mod utility;

pub use config::SimConfig;
pub use economy::{init_economy, AgentId, AgentState, EconomyState};
pub use engine::{run, step, RunOutput, TradeRecord};
pub use error::{DomainError, ParamError};
pub use experiment::{compare_attractors, run_sweep, SweepReport, SweepSpec};
pub use metrics::{detect_convergence, ConvergenceReport, SnapshotRow};
pub use params::MarketParams;
pub use rng::RngStream;
