//! Flat `key = value` configuration files.
//!
//! ```text
//! # market
//! n_agents = 30
//! initial_price = 1.0
//! # experiment
//! start_prices = 0.2, 1.0, 5.0, 25.0
//! seeds = 1, 2, 3
//! ```
//!
//! Keys are the [`MarketParams`] field names plus the experiment keys
//! listed in [`EXPERIMENT_KEYS`]. Unknown or repeated keys are errors.

use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::experiment::{SweepSpec, DEFAULT_ATTRACTOR_TOLERANCE};
use crate::metrics::{DEFAULT_CV_TOLERANCE, DEFAULT_WINDOW};
use crate::params::{MarketParams, Violation};

pub const PARAM_KEYS: [&str; 11] = [
    "n_agents",
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
];

pub const EXPERIMENT_KEYS: [&str; 6] = [
    "start_prices",
    "seeds",
    "n_iterations",
    "convergence_window",
    "convergence_cv_tolerance",
    "attractor_rel_tolerance",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key {key:?} given more than once")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: cannot parse {value:?} for key {key:?}")]
    BadValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("invalid configuration: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

/// Everything a config file can set.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: MarketParams,
    pub start_prices: Vec<f64>,
    pub seeds: Vec<u64>,
    pub n_iterations: u64,
    pub convergence_window: usize,
    pub convergence_cv_tolerance: f64,
    pub attractor_rel_tolerance: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        let sweep = SweepSpec::attractor_default();
        Self {
            params: sweep.base_params,
            start_prices: sweep.start_prices,
            seeds: sweep.seeds,
            n_iterations: sweep.n_iterations,
            convergence_window: DEFAULT_WINDOW,
            convergence_cv_tolerance: DEFAULT_CV_TOLERANCE,
            attractor_rel_tolerance: DEFAULT_ATTRACTOR_TOLERANCE,
        }
    }
}

impl SimConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        text.parse()
    }

    /// The seed used for single runs: the first listed seed.
    pub fn primary_seed(&self) -> u64 {
        self.seeds.first().copied().unwrap_or_default()
    }

    pub fn sweep_spec(&self) -> SweepSpec {
        SweepSpec {
            base_params: self.params.clone(),
            start_prices: self.start_prices.clone(),
            seeds: self.seeds.clone(),
            n_iterations: self.n_iterations,
            convergence_window: self.convergence_window,
            cv_tolerance: self.convergence_cv_tolerance,
        }
    }

    /// Param violations plus experiment-level problems, as messages.
    pub fn problems(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .params
            .validate()
            .iter()
            .map(Violation::to_string)
            .collect();
        out.extend(self.sweep_spec().shape_problems());
        if !(self.convergence_cv_tolerance >= 0.0) {
            out.push("convergence_cv_tolerance must be >= 0".to_owned());
        }
        if !(self.attractor_rel_tolerance >= 0.0) {
            out.push("attractor_rel_tolerance must be >= 0".to_owned());
        }
        out
    }

    pub fn validated(self) -> Result<Self, ConfigError> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(self)
        } else {
            Err(ConfigError::Invalid(problems))
        }
    }

    fn set(&mut self, line: usize, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = || ConfigError::BadValue {
            line,
            key: key.to_owned(),
            value: value.to_owned(),
        };
        fn one<T: FromStr>(v: &str, bad: impl Fn() -> ConfigError) -> Result<T, ConfigError> {
            v.parse().map_err(|_| bad())
        }
        fn list<T: FromStr>(v: &str, bad: impl Fn() -> ConfigError) -> Result<Vec<T>, ConfigError> {
            v.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|_| bad()))
                .collect()
        }

        let p = &mut self.params;
        match key {
            "n_agents" => p.n_agents = one(value, bad)?,
            "initial_savings" => p.initial_savings = one(value, bad)?,
            "initial_price" => p.initial_price = one(value, bad)?,
            "productivity" => p.productivity = one(value, bad)?,
            "consume_factor" => p.consume_factor = one(value, bad)?,
            "max_stock" => p.max_stock = one(value, bad)?,
            "min_price_change_period" => p.min_price_change_period = one(value, bad)?,
            "typical_goods_per_day" => p.typical_goods_per_day = one(value, bad)?,
            "goods_utility_scale" => p.goods_utility_scale = one(value, bad)?,
            "savings_utility_scale" => p.savings_utility_scale = one(value, bad)?,
            "sellers_sampled" => p.sellers_sampled = one(value, bad)?,
            "start_prices" => self.start_prices = list(value, bad)?,
            "seeds" => self.seeds = list(value, bad)?,
            "n_iterations" => self.n_iterations = one(value, bad)?,
            "convergence_window" => self.convergence_window = one(value, bad)?,
            "convergence_cv_tolerance" => self.convergence_cv_tolerance = one(value, bad)?,
            "attractor_rel_tolerance" => self.attractor_rel_tolerance = one(value, bad)?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_owned(),
                })
            }
        }
        Ok(())
    }
}

/// Parses without validating; call [`SimConfig::validated`] afterwards.
///
/// Settings not present in the text keep their defaults. When
/// `productivity` is set but `typical_goods_per_day` or `max_stock` are
/// not, those follow it (one day of output, ten days of output).
impl FromStr for SimConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut config = SimConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .filter(|(k, _)| !k.is_empty())
                .ok_or_else(|| ConfigError::Syntax {
                    line,
                    text: raw.to_owned(),
                })?;
            let canonical = PARAM_KEYS
                .iter()
                .chain(EXPERIMENT_KEYS.iter())
                .find(|k| **k == key)
                .copied()
                .ok_or_else(|| ConfigError::UnknownKey {
                    line,
                    key: key.to_owned(),
                })?;
            if seen.contains(&canonical) {
                return Err(ConfigError::DuplicateKey {
                    line,
                    key: key.to_owned(),
                });
            }
            seen.push(canonical);
            config.set(line, key, value)?;
        }

        if seen.contains(&"productivity") {
            let productivity = config.params.productivity;
            if !seen.contains(&"typical_goods_per_day") {
                config.params.typical_goods_per_day = productivity;
            }
            if !seen.contains(&"max_stock") {
                config.params.max_stock = 10.0 * productivity;
            }
        }
        Ok(config)
    }
}
