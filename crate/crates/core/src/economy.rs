//! Agent and population state, and construction of the initial economy.

use serde::{Deserialize, Serialize};

use crate::error::ParamError;
use crate::params::MarketParams;
use crate::rng::RngStream;

/// Stable index of an agent within its economy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub usize);

impl std::fmt::Display for AgentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// One agent. Goods it made and goods it bought are tracked separately so
/// that an agent can never consume its own produce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: AgentId,
    pub savings: f64,
    /// Produce made and available for sale, in `[0, max_stock]`.
    pub stock_for_sale: f64,
    /// Produce purchased and available to be consumed.
    pub consumable: f64,
    /// Advertised selling price, always > 0.
    pub price: f64,
    pub iterations_since_reprice: u32,
    pub units_sold_since_reprice: f64,
}

impl AgentState {
    fn fresh(id: usize, params: &MarketParams) -> Self {
        Self {
            id: AgentId(id),
            savings: params.initial_savings,
            stock_for_sale: 0.0,
            consumable: 0.0,
            price: params.initial_price,
            iterations_since_reprice: 0,
            units_sold_since_reprice: 0.0,
        }
    }
}

/// The whole population at one point in simulated time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconomyState {
    pub iteration: u64,
    pub agents: Vec<AgentState>,
    pub params: MarketParams,
}

impl EconomyState {
    pub fn agent(&self, id: AgentId) -> &AgentState {
        &self.agents[id.0]
    }
}

/// Builds the iteration-0 economy and the run's random stream.
///
/// Every agent starts with the same endowment and price and with both
/// inventories empty.
pub fn init_economy(
    params: &MarketParams,
    seed: u64,
) -> Result<(EconomyState, RngStream), ParamError> {
    params.validated()?;
    let agents = (0..params.n_agents)
        .map(|id| AgentState::fresh(id, params))
        .collect();
    let state = EconomyState {
        iteration: 0,
        agents,
        params: params.clone(),
    };
    Ok((state, RngStream::new(seed)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_economy_has_thirty_agents_at_the_starting_price() {
        let (state, rng) = init_economy(&MarketParams::default(), 42).unwrap();
        assert_eq!(state.iteration, 0);
        assert_eq!(state.agents.len(), 30);
        assert_eq!(rng.seed(), 42);
        for (i, a) in state.agents.iter().enumerate() {
            assert_eq!(a.id, AgentId(i));
            assert_eq!(a.price, 1.0);
            assert_eq!(a.savings, 100.0);
            assert_eq!(a.stock_for_sale, 0.0);
            assert_eq!(a.consumable, 0.0);
            assert_eq!(a.iterations_since_reprice, 0);
            assert_eq!(a.units_sold_since_reprice, 0.0);
        }
        let total: f64 = state.agents.iter().map(|a| a.savings).sum();
        assert_eq!(total, 3000.0);
    }

    #[test]
    fn rejects_invalid_params() {
        let p = MarketParams {
            consume_factor: 1.0,
            ..MarketParams::default()
        };
        let err = init_economy(&p, 1).unwrap_err();
        assert_eq!(err.violations.len(), 1);
        assert!(err.to_string().contains("consume_factor"));
    }

    #[test]
    fn construction_does_not_depend_on_seed() {
        let p = MarketParams::default();
        let (a, _) = init_economy(&p, 1).unwrap();
        let (b, _) = init_economy(&p, 2).unwrap();
        assert_eq!(a, b);
    }
}
