//! Wellbeing as the product of a goods curve and a savings curve.
//!
//! Savings are not valued in money but in days of consumption they can buy
//! at the prevailing price level, so the savings curve is invariant under a
//! joint rescaling of savings and prices.

use crate::error::DomainError;
use crate::params::MarketParams;

/// A utility level in `[0, 1)`. Only the curves in this module construct it.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct UtilityValue(f64);

impl UtilityValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// `1 - exp(-x / scale)`: zero at zero, strictly increasing, strictly
/// concave, bounded by 1.
pub fn diminishing_returns_utility(x: f64, scale: f64) -> Result<UtilityValue, DomainError> {
    if !(x >= 0.0) {
        return Err(DomainError::Negative {
            name: "quantity",
            value: x,
        });
    }
    if !(scale > 0.0) {
        return Err(DomainError::NonPositive {
            name: "scale",
            value: scale,
        });
    }
    // -expm1 keeps precision for x << scale
    Ok(UtilityValue(-(-x / scale).exp_m1()))
}

pub fn utility_from_goods(
    consumable: f64,
    params: &MarketParams,
) -> Result<UtilityValue, DomainError> {
    diminishing_returns_utility(consumable, params.goods_utility_scale)
}

/// Savings converted to days of consumption at `price_level`, then run
/// through the savings curve.
pub fn utility_from_savings(
    savings: f64,
    price_level: f64,
    params: &MarketParams,
) -> Result<UtilityValue, DomainError> {
    if !(price_level > 0.0) {
        return Err(DomainError::NonPositive {
            name: "price_level",
            value: price_level,
        });
    }
    if !(savings >= 0.0) {
        return Err(DomainError::Negative {
            name: "savings",
            value: savings,
        });
    }
    let days = savings_in_days(savings, price_level, params);
    diminishing_returns_utility(days, params.savings_utility_scale)
}

/// How many days of the typical consumption bundle `savings` buys.
pub fn savings_in_days(savings: f64, price_level: f64, params: &MarketParams) -> f64 {
    let cost_of_one_day = price_level * params.typical_goods_per_day;
    savings / cost_of_one_day
}

pub fn wellbeing(
    consumable: f64,
    savings: f64,
    price_level: f64,
    params: &MarketParams,
) -> Result<UtilityValue, DomainError> {
    let goods = utility_from_goods(consumable, params)?;
    let money = utility_from_savings(savings, price_level, params)?;
    Ok(UtilityValue(goods.0 * money.0))
}

/// Whether buying one unit at `price` strictly raises wellbeing.
///
/// Callers must already have checked `savings >= price`.
pub fn purchase_improves_wellbeing(
    consumable: f64,
    savings: f64,
    price: f64,
    price_level: f64,
    params: &MarketParams,
) -> bool {
    let remaining = savings - price;
    if remaining < 0.0 {
        return false;
    }
    let now = wellbeing(consumable, savings, price_level, params);
    let after = wellbeing(consumable + 1.0, remaining, price_level, params);
    matches!((now, after), (Ok(now), Ok(after)) if after > now)
}
