//! One iteration of the economy: produce, consume, purchase, reprice.

use serde::{Deserialize, Serialize};

use crate::economy::{init_economy, AgentId, AgentState, EconomyState};
use crate::error::ParamError;
use crate::metrics::{average_selling_price, record_snapshot, SnapshotRow};
use crate::params::MarketParams;
use crate::rng::RngStream;
use crate::utility::purchase_improves_wellbeing;

/// Fire-sale cut when storage fills in under three days.
pub const FIRE_SALE: f64 = 0.85;
pub const MILD_CUT: f64 = 0.95;
pub const MILD_RISE: f64 = 1.05;
/// Rise when storage empties in under three days.
pub const STEEP_RISE: f64 = 1.1;

const FIRE_SALE_DAYS: f64 = 3.0;
const MILD_CUT_DAYS: f64 = 15.0;
const SLOW_FILL_DAYS: f64 = 90.0;
const EMPTYING_DAYS: f64 = 3.0;

/// One executed sale of a single unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeRecord {
    pub iteration: u64,
    pub buyer_id: AgentId,
    pub seller_id: AgentId,
    /// Seller's advertised price at the moment of the trade.
    pub price_paid: f64,
    pub units: u32,
    /// Price level the buyer used to value its savings.
    pub price_level: f64,
    pub buyer_savings_before: f64,
    pub buyer_consumable_before: f64,
}

/// Everything one [`step`] produced besides the mutated state.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepOutcome {
    pub trades: Vec<TradeRecord>,
    pub discarded_production: f64,
    pub price_level: f64,
}

/// Adds each agent's production to its for-sale stock, clamped at
/// capacity. Returns the total amount discarded by the clamp.
pub fn step_produce(state: &mut EconomyState) -> f64 {
    let productivity = state.params.productivity;
    let max_stock = state.params.max_stock;
    let mut discarded = 0.0;
    for agent in &mut state.agents {
        let wanted = agent.stock_for_sale + productivity;
        if wanted > max_stock {
            discarded += wanted - max_stock;
            agent.stock_for_sale = max_stock;
        } else {
            agent.stock_for_sale = wanted;
        }
    }
    discarded
}

pub fn step_consume(state: &mut EconomyState) {
    let factor = state.params.consume_factor;
    for agent in &mut state.agents {
        agent.consumable *= factor;
    }
}

/// Draws up to `sellers_sampled` distinct sellers other than `buyer` that
/// hold at least one unit for sale. The result is written into `out`.
pub fn sample_sellers(
    state: &EconomyState,
    buyer: AgentId,
    rng: &mut RngStream,
    out: &mut Vec<AgentId>,
) {
    out.clear();
    out.extend(
        state
            .agents
            .iter()
            .filter(|a| a.id != buyer && a.stock_for_sale >= 1.0)
            .map(|a| a.id),
    );
    let k = state.params.sellers_sampled.min(out.len());
    rng.choose_prefix(out, k);
    out.truncate(k);
}

/// Cheapest seller among `candidates`; ties go to the lowest id.
fn cheapest(agents: &[AgentState], candidates: &[AgentId]) -> Option<AgentId> {
    candidates.iter().copied().min_by(|a, b| {
        agents[a.0]
            .price
            .total_cmp(&agents[b.0].price)
            .then(a.cmp(b))
    })
}

/// Every agent, in a fresh random order, considers buying one unit from the
/// cheapest of its sampled sellers. The price level used to value savings
/// is fixed at the start of the phase.
pub fn step_purchase(state: &mut EconomyState, rng: &mut RngStream) -> (Vec<TradeRecord>, f64) {
    let price_level = average_selling_price(state);
    let iteration = state.iteration + 1;

    let mut order: Vec<AgentId> = state.agents.iter().map(|a| a.id).collect();
    rng.shuffle(&mut order);

    let mut trades = Vec::new();
    let mut sampled = Vec::with_capacity(state.agents.len());
    for buyer in order {
        sample_sellers(state, buyer, rng, &mut sampled);
        let Some(seller) = cheapest(&state.agents, &sampled) else {
            continue;
        };
        let price = state.agents[seller.0].price;
        let b = &state.agents[buyer.0];
        if b.savings < price
            || !purchase_improves_wellbeing(
                b.consumable,
                b.savings,
                price,
                price_level,
                &state.params,
            )
        {
            continue;
        }
        trades.push(TradeRecord {
            iteration,
            buyer_id: buyer,
            seller_id: seller,
            price_paid: price,
            units: 1,
            price_level,
            buyer_savings_before: b.savings,
            buyer_consumable_before: b.consumable,
        });

        let b = &mut state.agents[buyer.0];
        b.savings -= price;
        b.consumable += 1.0;
        let s = &mut state.agents[seller.0];
        s.savings += price;
        s.stock_for_sale -= 1.0;
        s.units_sold_since_reprice += 1.0;
    }
    (trades, price_level)
}

/// Result of evaluating one agent's pricing rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceUpdate {
    pub price: f64,
    /// Multiplier applied; 1.0 when the price was left alone.
    pub factor: f64,
}

impl PriceUpdate {
    pub fn repriced(&self) -> bool {
        self.factor != 1.0
    }
}

/// Storage-driven pricing rule.
///
/// `iterations_since_reprice` must already count the current iteration.
/// Nothing happens until more than `min_price_change_period` iterations
/// have passed since the last change. After that, the net daily stock
/// growth since the last change decides: storage about to fill cuts the
/// price, storage about to empty (or sitting below half capacity while
/// draining) raises it.
pub fn update_price(agent: &AgentState, params: &MarketParams) -> PriceUpdate {
    let factor = price_factor(agent, params);
    PriceUpdate {
        price: agent.price * factor,
        factor,
    }
}

fn price_factor(agent: &AgentState, params: &MarketParams) -> f64 {
    if agent.iterations_since_reprice <= params.min_price_change_period {
        return 1.0;
    }
    let sales_per_day = agent.units_sold_since_reprice / f64::from(agent.iterations_since_reprice);
    let stock_growth_per_day = params.productivity - sales_per_day;

    if stock_growth_per_day > 0.0 {
        let days_till_full = (params.max_stock - agent.stock_for_sale) / stock_growth_per_day;
        if days_till_full < FIRE_SALE_DAYS {
            FIRE_SALE
        } else if days_till_full < MILD_CUT_DAYS {
            MILD_CUT
        } else if days_till_full > SLOW_FILL_DAYS {
            MILD_RISE
        } else {
            1.0
        }
    } else {
        let days_till_empty = if stock_growth_per_day < 0.0 {
            agent.stock_for_sale / -stock_growth_per_day
        } else {
            f64::INFINITY
        };
        if days_till_empty < EMPTYING_DAYS {
            STEEP_RISE
        } else if agent.stock_for_sale < params.max_stock / 2.0 {
            MILD_RISE
        } else {
            1.0
        }
    }
}

/// Runs the pricing rule for every agent in id order. Agents that change
/// their price restart both reprice counters.
pub fn step_modify_prices(state: &mut EconomyState) {
    let params = &state.params;
    for agent in &mut state.agents {
        agent.iterations_since_reprice += 1;
        let update = update_price(agent, params);
        if update.repriced() {
            agent.price = update.price;
            agent.iterations_since_reprice = 0;
            agent.units_sold_since_reprice = 0.0;
        }
    }
}

/// Advances the economy by one iteration.
pub fn step(state: &mut EconomyState, rng: &mut RngStream) -> StepOutcome {
    let discarded_production = step_produce(state);
    step_consume(state);
    let (trades, price_level) = step_purchase(state, rng);
    step_modify_prices(state);
    state.iteration += 1;
    StepOutcome {
        trades,
        discarded_production,
        price_level,
    }
}

/// A complete trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub final_state: EconomyState,
    /// One row per iteration, recorded after the step.
    pub snapshots: Vec<SnapshotRow>,
    pub trades: Vec<TradeRecord>,
}

impl RunOutput {
    pub fn avg_price_series(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.avg_price).collect()
    }
}

pub fn run(params: &MarketParams, seed: u64, n_iterations: u64) -> Result<RunOutput, ParamError> {
    let (mut state, mut rng) = init_economy(params, seed)?;
    let mut snapshots = Vec::with_capacity(n_iterations as usize);
    let mut trades = Vec::new();
    for _ in 0..n_iterations {
        let outcome = step(&mut state, &mut rng);
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
