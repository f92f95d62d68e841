//! Per-iteration invariant checks over a running economy.

use thiserror::Error;

use crate::economy::{init_economy, AgentId, EconomyState};
use crate::engine::{RunOutput, StepOutcome};
use crate::error::ParamError;
use crate::metrics::{record_snapshot, total_money};
use crate::params::MarketParams;
use crate::rng::RngStream;

/// Relative drift of total money tolerated from floating-point accumulation.
pub const MONEY_REL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Invariant {
    #[error("money conservation: total {total} differs from {expected}")]
    MoneyConservation { total: f64, expected: f64 },
    #[error("price positivity: agent {agent} advertises {price}")]
    PricePositivity { agent: AgentId, price: f64 },
    #[error("savings non-negative: agent {agent} holds {savings}")]
    SavingsNonNegative { agent: AgentId, savings: f64 },
    #[error("stock bounds: agent {agent} holds {stock} for sale (capacity {max_stock})")]
    StockBounds {
        agent: AgentId,
        stock: f64,
        max_stock: f64,
    },
    #[error("consumable non-negative: agent {agent} holds {consumable}")]
    ConsumableNonNegative { agent: AgentId, consumable: f64 },
    #[error("goods ledger: {trades} trades but {sold} units left stock and {bought} entered consumption")]
    GoodsLedger {
        trades: usize,
        sold: f64,
        bought: f64,
    },
}

impl Invariant {
    /// Short stable name, used in CLI output.
    pub fn name(&self) -> &'static str {
        match self {
            Invariant::MoneyConservation { .. } => "money conservation",
            Invariant::PricePositivity { .. } => "price positivity",
            Invariant::SavingsNonNegative { .. } => "savings non-negative",
            Invariant::StockBounds { .. } => "stock bounds",
            Invariant::ConsumableNonNegative { .. } => "consumable non-negative",
            Invariant::GoodsLedger { .. } => "goods ledger",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("iteration {iteration}: {violation}")]
pub struct AuditFailure {
    pub iteration: u64,
    pub violation: Invariant,
}

#[derive(Debug, Error)]
pub enum AuditError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Violated(#[from] AuditFailure),
}

/// Checks every state-level invariant; returns the first one broken.
pub fn check_state(state: &EconomyState) -> Result<(), Invariant> {
    let expected = state.params.money_supply();
    let total = total_money(state);
    if (total - expected).abs() > MONEY_REL_TOLERANCE * expected.abs().max(f64::MIN_POSITIVE) {
        return Err(Invariant::MoneyConservation { total, expected });
    }
    let max_stock = state.params.max_stock;
    for a in &state.agents {
        if !(a.price > 0.0 && a.price.is_finite()) {
            return Err(Invariant::PricePositivity {
                agent: a.id,
                price: a.price,
            });
        }
        if !(a.savings >= 0.0) {
            return Err(Invariant::SavingsNonNegative {
                agent: a.id,
                savings: a.savings,
            });
        }
        if !(a.stock_for_sale >= 0.0 && a.stock_for_sale <= max_stock) {
            return Err(Invariant::StockBounds {
                agent: a.id,
                stock: a.stock_for_sale,
                max_stock,
            });
        }
        if !(a.consumable >= 0.0) {
            return Err(Invariant::ConsumableNonNegative {
                agent: a.id,
                consumable: a.consumable,
            });
        }
    }
    Ok(())
}

/// Runs a trajectory through `step_fn`, checking every invariant after each
/// iteration. The step function is a parameter so that tests can inject
/// faults; production code passes [`crate::engine::step`].
pub fn audited_run<F>(
    params: &MarketParams,
    seed: u64,
    n_iterations: u64,
    mut step_fn: F,
) -> Result<RunOutput, AuditError>
where
    F: FnMut(&mut EconomyState, &mut RngStream) -> StepOutcome,
{
    let (mut state, mut rng) = init_economy(params, seed)?;
    check_state(&state).map_err(|violation| AuditFailure {
        iteration: 0,
        violation,
    })?;

    let mut snapshots = Vec::with_capacity(n_iterations as usize);
    let mut trades = Vec::new();
    for _ in 0..n_iterations {
        let stock_before: f64 = state.agents.iter().map(|a| a.stock_for_sale).sum();
        let consumable_before: f64 = state.agents.iter().map(|a| a.consumable).sum();
        let outcome = step_fn(&mut state, &mut rng);
        let fail = |violation| AuditFailure {
            iteration: state.iteration,
            violation,
        };
        check_state(&state).map_err(fail)?;
        check_goods_ledger(&state, stock_before, consumable_before, &outcome).map_err(fail)?;

        snapshots.push(record_snapshot(
            &state,
            outcome.trades.len() as u64,
            outcome.discarded_production,
        ));
        trades.extend(outcome.trades);
    }
    Ok(RunOutput {
        final_state: state,
        snapshots,
        trades,
    })
}

/// Reconstructs the stock and consumable totals from the step's own
/// reports (production, discards, decay, trades) and compares them with
/// the state.
fn check_goods_ledger(
    state: &EconomyState,
    stock_before: f64,
    consumable_before: f64,
    outcome: &StepOutcome,
) -> Result<(), Invariant> {
    let p = &state.params;
    let n = state.agents.len() as f64;
    let traded = outcome.trades.len() as f64;
    let produced = n * p.productivity - outcome.discarded_production;
    let sold = stock_before + produced - state.agents.iter().map(|a| a.stock_for_sale).sum::<f64>();
    let bought = state.agents.iter().map(|a| a.consumable).sum::<f64>()
        - consumable_before * p.consume_factor;
    let tol = 1e-9 * (1.0 + stock_before + consumable_before + n * p.max_stock);
    if (sold - traded).abs() > tol || (bought - traded).abs() > tol {
        return Err(Invariant::GoodsLedger {
            trades: outcome.trades.len(),
            sold,
            bought,
        });
    }
    Ok(())
}
