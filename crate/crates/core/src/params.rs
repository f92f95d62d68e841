//! Tunable constants of the simulated economy.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ParamError;

/// Every constant that shapes one run of the economy.
///
/// A params value is immutable for the lifetime of a run; sweeps clone it
/// and override `initial_price`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    /// Number of agents; each is both a producer and a consumer.
    pub n_agents: usize,
    /// Money endowment given to every agent at construction.
    pub initial_savings: f64,
    /// Advertised price every agent starts with.
    pub initial_price: f64,
    /// Goods produced per agent per iteration.
    pub productivity: f64,
    /// Multiplicative daily decay of the consumable inventory, in (0, 1).
    pub consume_factor: f64,
    /// Capacity of each agent's for-sale storage.
    pub max_stock: f64,
    /// Iterations that must elapse before an agent may reprice again.
    pub min_price_change_period: u32,
    /// Size of the reference daily consumption bundle used to value savings.
    pub typical_goods_per_day: f64,
    /// Curvature scale of the goods utility curve, in goods units.
    pub goods_utility_scale: f64,
    /// Curvature scale of the savings utility curve, in days of consumption.
    pub savings_utility_scale: f64,
    /// How many candidate sellers a buyer interrogates per iteration.
    pub sellers_sampled: usize,
}

impl Default for MarketParams {
    fn default() -> Self {
        let productivity = 0.5;
        Self {
            n_agents: 30,
            initial_savings: 100.0,
            initial_price: 1.0,
            productivity,
            consume_factor: 0.95,
            max_stock: 10.0 * productivity,
            min_price_change_period: 5,
            typical_goods_per_day: productivity,
            goods_utility_scale: 5.0,
            savings_utility_scale: 10.0,
            sellers_sampled: 3,
        }
    }
}

/// One broken constraint on a [`MarketParams`] value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl MarketParams {
    /// Returns every violated constraint. An empty list means the params
    /// are usable.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut check = |ok: bool, field: &'static str, message: String| {
            if !ok {
                out.push(Violation { field, message });
            }
        };

        check(
            self.n_agents >= 2,
            "n_agents",
            format!(
                "at least 2 agents are required so that every seller has a counterparty (got {})",
                self.n_agents
            ),
        );
        check(
            self.initial_savings >= 0.0 && self.initial_savings.is_finite(),
            "initial_savings",
            format!("must be finite and >= 0 (got {})", self.initial_savings),
        );
        check(
            is_positive(self.initial_price),
            "initial_price",
            format!("must be finite and > 0 (got {})", self.initial_price),
        );
        check(
            is_positive(self.productivity),
            "productivity",
            format!("must be finite and > 0 (got {})", self.productivity),
        );
        check(
            self.consume_factor > 0.0 && self.consume_factor < 1.0,
            "consume_factor",
            format!(
                "must lie strictly between 0 and 1 (got {})",
                self.consume_factor
            ),
        );
        check(
            self.max_stock.is_finite() && self.max_stock > self.productivity,
            "max_stock",
            format!(
                "must be finite and exceed productivity {} (got {})",
                self.productivity, self.max_stock
            ),
        );
        check(
            self.min_price_change_period >= 1,
            "min_price_change_period",
            format!("must be >= 1 (got {})", self.min_price_change_period),
        );
        check(
            is_positive(self.typical_goods_per_day),
            "typical_goods_per_day",
            format!(
                "must be finite and > 0 (got {})",
                self.typical_goods_per_day
            ),
        );
        check(
            is_positive(self.goods_utility_scale),
            "goods_utility_scale",
            format!("must be finite and > 0 (got {})", self.goods_utility_scale),
        );
        check(
            is_positive(self.savings_utility_scale),
            "savings_utility_scale",
            format!(
                "must be finite and > 0 (got {})",
                self.savings_utility_scale
            ),
        );
        // only meaningful once there is a counterparty to sample
        check(
            self.n_agents < 2
                || (self.sellers_sampled >= 1 && self.sellers_sampled < self.n_agents),
            "sellers_sampled",
            format!(
                "must lie in [1, n_agents - 1] = [1, {}] (got {})",
                self.n_agents.saturating_sub(1),
                self.sellers_sampled
            ),
        );
        out
    }

    /// Like [`validate`](Self::validate) but folds violations into an error.
    pub fn validated(&self) -> Result<(), ParamError> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ParamError { violations })
        }
    }

    /// Money held by the whole population; constant for a run.
    pub fn money_supply(&self) -> f64 {
        self.n_agents as f64 * self.initial_savings
    }
}

fn is_positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        assert!(MarketParams::default().validate().is_empty());
    }

    #[test]
    fn single_agent_names_the_two_agent_minimum() {
        let p = MarketParams {
            n_agents: 1,
            ..MarketParams::default()
        };
        let v = p.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "n_agents");
        assert!(v[0].message.contains("at least 2"));
    }

    #[test]
    fn sampling_more_sellers_than_counterparties_is_rejected() {
        let p = MarketParams {
            n_agents: 3,
            sellers_sampled: 3,
            ..MarketParams::default()
        };
        assert_eq!(p.validate()[0].field, "sellers_sampled");
    }

    #[test]
    fn consume_factor_of_one_is_rejected() {
        let p = MarketParams {
            consume_factor: 1.0,
            ..MarketParams::default()
        };
        let v = p.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "consume_factor");
    }

    #[test]
    fn every_bound_is_checked() {
        let p = MarketParams {
            n_agents: 30,
            initial_savings: -1.0,
            initial_price: 0.0,
            productivity: 0.0,
            consume_factor: 0.0,
            max_stock: f64::NAN,
            min_price_change_period: 0,
            typical_goods_per_day: -2.0,
            goods_utility_scale: 0.0,
            savings_utility_scale: f64::INFINITY,
            sellers_sampled: 30,
        };
        let fields: Vec<_> = p.validate().into_iter().map(|v| v.field).collect();
        assert_eq!(
            fields,
            [
                "initial_savings",
                "initial_price",
                "productivity",
                "consume_factor",
                "max_stock",
                "min_price_change_period",
                "typical_goods_per_day",
                "goods_utility_scale",
                "savings_utility_scale",
                "sellers_sampled",
            ]
        );
    }

    #[test]
    fn max_stock_must_exceed_productivity() {
        let p = MarketParams {
            productivity: 10.0,
            max_stock: 10.0,
            ..MarketParams::default()
        };
        assert_eq!(p.validate()[0].field, "max_stock");
    }

    #[test]
    fn money_supply_of_defaults() {
        assert_eq!(MarketParams::default().money_supply(), 3000.0);
    }
}
