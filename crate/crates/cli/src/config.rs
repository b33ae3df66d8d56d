//! Engine configuration: a single JSON file with the documented top-level
//! keys {schedules, excise_rates, land_rates, municipal_rates,
//! transfer_params, scenario}. Every key is optional; built-in defaults
//! cover the current Georgian rules.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use fiscal_core::money::{Currency, Decimal, Money};
use fiscal_core::scenarios::DEFAULT_GAMMA;
use fiscal_core::transfers::TransferParams;
use fiscal_core::TaxSchedule;

use crate::CliError;

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct EngineConfig {
    /// Named schedules; `income` drives the persons computation.
    pub schedules: BTreeMap<String, TaxSchedule>,
    /// Per-category excise rates, used when a row does not carry its own.
    pub excise_rates: BTreeMap<String, ExciseRateEntry>,
    /// Agricultural per-hectare rates by jurisdiction, with a `default` key.
    pub land_rates: BTreeMap<String, Money>,
    /// Household property rates by jurisdiction, with a `default` key.
    pub municipal_rates: BTreeMap<String, Decimal>,
    pub transfer_params: Option<TransferParamsConfig>,
    pub scenario: Option<ScenarioConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExciseRateEntry {
    #[serde(default)]
    pub per_unit: Option<Money>,
    #[serde(default)]
    pub fraction: Option<Decimal>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferParamsConfig {
    pub nominal_gdp_forecast: Money,
    pub proposed_g: Money,
    #[serde(default)]
    pub city_share: Option<Decimal>,
    #[serde(default)]
    pub municipality_share: Option<Decimal>,
    #[serde(default)]
    pub gdp_floor_fraction: Option<Decimal>,
    /// Pass-through grants for delegated powers, by municipality id.
    #[serde(default)]
    pub targeted: BTreeMap<String, Money>,
    /// Pass-through special assistance, by municipality id.
    #[serde(default)]
    pub special: BTreeMap<String, Money>,
}

impl TransferParamsConfig {
    pub fn to_params(&self) -> TransferParams {
        let mut params = TransferParams::new(self.nominal_gdp_forecast, self.proposed_g);
        if let Some(v) = self.city_share {
            params.city_share = v;
        }
        if let Some(v) = self.municipality_share {
            params.municipality_share = v;
        }
        if let Some(v) = self.gdp_floor_fraction {
            params.gdp_floor_fraction = v;
        }
        params
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    /// Currency of the population; defaults to GEL.
    pub population_currency: Option<Currency>,
    /// Inline incomes; a `--input` CSV takes precedence.
    pub incomes: Vec<Money>,
    /// Names of config schedules to evaluate.
    pub schedules: Vec<String>,
    /// Shipped comparator approximations to include
    /// (azerbaijan, france, germany, united_kingdom).
    pub comparators: Vec<String>,
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub base_b0: Option<Money>,
    pub elasticity_gamma: Option<f64>,
    /// Grid step over [0,1]; must divide the interval evenly.
    pub grid_step: Option<Decimal>,
}

/// Shipped default sweep base: 1,000,000.00 at rate zero.
pub const DEFAULT_SWEEP_BASE: Money = Money::from_major(1_000_000);

impl SweepSection {
    pub fn to_config(&self) -> Result<fiscal_core::scenarios::SweepConfig, CliError> {
        let mut cfg = fiscal_core::scenarios::SweepConfig::new(
            self.base_b0.unwrap_or(DEFAULT_SWEEP_BASE),
        );
        cfg.elasticity_gamma = self.elasticity_gamma.unwrap_or(DEFAULT_GAMMA);
        if let Some(step) = self.grid_step {
            cfg.rate_grid = grid_from_step(step)?;
        }
        Ok(cfg)
    }
}

/// Builds the ascending grid 0, step, 2*step, ..., 1.
pub fn grid_from_step(step: Decimal) -> Result<Vec<Decimal>, CliError> {
    if step <= Decimal::ZERO || step > Decimal::ONE {
        return Err(CliError::validation(format!("grid_step {step} outside (0,1]")));
    }
    let step = step.as_rational();
    let one = fiscal_core::Rational::from_integer(1);
    let mut grid = Vec::new();
    let mut k = 0i128;
    loop {
        let value = fiscal_core::Rational::from_integer(k) * step;
        if value > one {
            break;
        }
        grid.push(Decimal::from_rational(value));
        k += 1;
    }
    if *grid.last().expect("grid has at least 0") != Decimal::ONE {
        grid.push(Decimal::ONE);
    }
    Ok(grid)
}

impl EngineConfig {
    pub fn load(path: Option<&Path>) -> Result<EngineConfig, CliError> {
        let mut config = match path {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::io(format!("cannot read config {}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::validation(format!("config {}: {e}", path.display())))?
            }
            None => EngineConfig::default(),
        };
        config.fill_defaults();
        config.validate()?;
        Ok(config)
    }

    fn fill_defaults(&mut self) {
        self.schedules
            .entry("income".to_string())
            .or_insert_with(fiscal_core::catalog::income_flat);
        self.schedules
            .entry("income_2004".to_string())
            .or_insert_with(fiscal_core::catalog::income_2004);
    }

    fn validate(&self) -> Result<(), CliError> {
        for (name, schedule) in &self.schedules {
            let violations = schedule.validate();
            if !violations.is_empty() {
                let text = violations
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join("; ");
                return Err(CliError::validation(format!("schedule {name:?}: {text}")));
            }
        }
        for (category, entry) in &self.excise_rates {
            if entry.per_unit.is_some() == entry.fraction.is_some() {
                return Err(CliError::validation(format!(
                    "excise_rates.{category}: exactly one of per_unit/fraction is required"
                )));
            }
        }
        Ok(())
    }

    pub fn schedule(&self, name: &str) -> Result<&TaxSchedule, CliError> {
        self.schedules
            .get(name)
            .ok_or_else(|| CliError::validation(format!("config has no schedule named {name:?}")))
    }

    /// Household rate for a jurisdiction, falling back to `default`.
    pub fn municipal_rate(&self, jurisdiction: &str) -> Option<Decimal> {
        self.municipal_rates
            .get(jurisdiction)
            .or_else(|| self.municipal_rates.get("default"))
            .copied()
    }

    /// Agricultural per-hectare rate, falling back to `default`.
    pub fn land_rate(&self, jurisdiction: &str) -> Option<Money> {
        self.land_rates
            .get(jurisdiction)
            .or_else(|| self.land_rates.get("default"))
            .copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_ship_the_income_schedules() {
        let config = EngineConfig::load(None).unwrap();
        assert!(config.schedules.contains_key("income"));
        assert!(config.schedules.contains_key("income_2004"));
    }

    #[test]
    fn grid_step_builds_the_unit_interval() {
        let grid = grid_from_step("0.01".parse().unwrap()).unwrap();
        assert_eq!(grid.len(), 101);
        assert_eq!(grid[0], Decimal::ZERO);
        assert_eq!(*grid.last().unwrap(), Decimal::ONE);
        // A step that does not divide 1 still ends exactly at 1.
        let coarse = grid_from_step("0.3".parse().unwrap()).unwrap();
        assert_eq!(*coarse.last().unwrap(), Decimal::ONE);
    }
}
