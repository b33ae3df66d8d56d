//! Policy comparison: populations under alternative schedules and
//! revenue-maximizing rate sweeps.
//!
//! The sweep embodies the threshold concept that raising the rate grows
//! revenue only up to a band around 30-40%: the modeled aggregate base
//! shrinks as (1-r)^gamma, so revenue r*B(r) rises, peaks inside the band
//! at the default elasticity, and collapses to zero at r=1.

use serde::{Deserialize, Serialize};

use crate::money::{Currency, Decimal, Money};
use crate::schedules::{Bracket, ScheduleError, TaxSchedule};

/// Default base-shrinkage elasticity; the continuous-peak rate is
/// 1/(1+gamma), about 0.35.
pub const DEFAULT_GAMMA: f64 = 1.857;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("schedule {label} is in {schedule}, population is in {population}")]
    CurrencyMix { label: String, schedule: Currency, population: Currency },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("elasticity gamma must be positive, got {0}")]
    BadGamma(f64),
    #[error("rate grid must be ascending within [0,1]")]
    BadGrid,
    #[error("aggregate base must not be negative, got {0}")]
    NegativeBase(Money),
}

/// A foreign income-tax schedule reduced to a two-bracket approximation:
/// the span's minimum rate up to a pivot of taxable income, the maximum
/// rate above it. Only the rate span and the non-taxable minimum are
/// sourced figures; the pivot is a declared approximation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparatorSchedule {
    pub country: String,
    pub schedule: TaxSchedule,
    /// Always true for the shipped two-bracket reductions.
    pub approximate: bool,
}

impl ComparatorSchedule {
    /// Two-bracket approximation. `pivot` is measured on taxable income,
    /// after the minimum subtraction.
    pub fn two_bracket(
        country: &str,
        min_rate: Decimal,
        max_rate: Decimal,
        pivot: Money,
        minimum: Money,
        currency: Currency,
    ) -> ComparatorSchedule {
        let schedule = TaxSchedule::progressive(
            vec![
                Bracket::new(Money::ZERO, Some(pivot), min_rate),
                Bracket::new(pivot, None, max_rate),
            ],
            currency,
        )
        .with_minimum(minimum);
        ComparatorSchedule { country: country.to_string(), schedule, approximate: true }
    }

    fn default_pivot(minimum: Money) -> Money {
        if minimum > Money::ZERO {
            // Twice the exempt amount; a stand-in for the unpublished
            // intermediate brackets.
            Money::from_minor(minimum.minor_units() * 2)
        } else {
            Money::from_major(10_000)
        }
    }

    /// Azerbaijan: 12%-35%, minimum 1,200,000 manat.
    pub fn azerbaijan() -> ComparatorSchedule {
        let minimum = Money::from_major(1_200_000);
        Self::two_bracket(
            "azerbaijan",
            Decimal::new(12, 100),
            Decimal::new(35, 100),
            Self::default_pivot(minimum),
            minimum,
            Currency::from("AZN"),
        )
    }

    /// France: 5.5%-45%, minimum 5,963 euros.
    pub fn france() -> ComparatorSchedule {
        let minimum = Money::from_major(5_963);
        Self::two_bracket(
            "france",
            Decimal::new(55, 1000),
            Decimal::new(45, 100),
            Self::default_pivot(minimum),
            minimum,
            Currency::from("EUR"),
        )
    }

    /// Germany: 14%-45%, no published minimum in the comparison.
    pub fn germany() -> ComparatorSchedule {
        Self::two_bracket(
            "germany",
            Decimal::new(14, 100),
            Decimal::new(45, 100),
            Self::default_pivot(Money::ZERO),
            Money::ZERO,
            Currency::from("EUR"),
        )
    }

    /// United Kingdom: 20%-45%, minimum 9,441 pounds.
    pub fn united_kingdom() -> ComparatorSchedule {
        let minimum = Money::from_major(9_441);
        Self::two_bracket(
            "united_kingdom",
            Decimal::new(20, 100),
            Decimal::new(45, 100),
            Self::default_pivot(minimum),
            minimum,
            Currency::from("GBP"),
        )
    }

    pub fn shipped() -> Vec<ComparatorSchedule> {
        vec![Self::azerbaijan(), Self::france(), Self::germany(), Self::united_kingdom()]
    }
}

/// Total revenue one schedule collects from a population.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleRevenue {
    pub label: String,
    pub currency: Currency,
    pub total_revenue: Money,
}

/// Evaluates every schedule over the incomes and totals the take.
///
/// Per-person taxes are summed exactly and rounded once per schedule, so a
/// flat rate collects exactly rate times total income. All incomes and all
/// schedules must share one currency; there is no conversion.
pub fn compare_schedules(
    incomes: &[Money],
    population_currency: &Currency,
    schedules: &[(&str, &TaxSchedule)],
) -> Result<Vec<ScheduleRevenue>, ScenarioError> {
    let mut out = Vec::with_capacity(schedules.len());
    for (label, schedule) in schedules {
        if schedule.currency != *population_currency {
            return Err(ScenarioError::CurrencyMix {
                label: label.to_string(),
                schedule: schedule.currency.clone(),
                population: population_currency.clone(),
            });
        }
        let mut total = crate::money::Rational::new_raw(0, 1);
        for income in incomes {
            total += schedule.evaluate_exact(*income)?;
        }
        out.push(ScheduleRevenue {
            label: label.to_string(),
            currency: schedule.currency.clone(),
            total_revenue: Money::round_half_up(total),
        });
    }
    Ok(out)
}

/// How the aggregate taxable base responds to the rate.
pub trait BaseModel {
    fn modeled_base(&self, base_at_zero: Money, rate: f64) -> f64;
}

/// B(r) = B0 * (1-r)^gamma.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerDecay {
    pub gamma: f64,
}

impl BaseModel for PowerDecay {
    fn modeled_base(&self, base_at_zero: Money, rate: f64) -> f64 {
        base_at_zero.minor_units() as f64 * (1.0 - rate).powf(self.gamma)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Aggregate taxable base at a zero rate.
    pub base_b0: Money,
    pub elasticity_gamma: f64,
    /// Ascending rates in [0,1].
    pub rate_grid: Vec<Decimal>,
}

impl SweepConfig {
    /// Default sweep: the full unit interval at step 0.01.
    pub fn new(base_b0: Money) -> SweepConfig {
        SweepConfig {
            base_b0,
            elasticity_gamma: DEFAULT_GAMMA,
            rate_grid: (0..=100).map(|i| Decimal::new(i, 100)).collect(),
        }
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        if self.base_b0.is_negative() {
            return Err(ScenarioError::NegativeBase(self.base_b0));
        }
        if !matches!(self.elasticity_gamma.partial_cmp(&0.0), Some(std::cmp::Ordering::Greater)) {
            return Err(ScenarioError::BadGamma(self.elasticity_gamma));
        }
        let in_range = self
            .rate_grid
            .iter()
            .all(|r| r.within(Decimal::ZERO, Decimal::ONE));
        let ascending = self.rate_grid.windows(2).all(|w| w[0] < w[1]);
        if self.rate_grid.is_empty() || !in_range || !ascending {
            return Err(ScenarioError::BadGrid);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub rate: Decimal,
    pub modeled_base: Money,
    pub revenue: Money,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Grid rate with the highest revenue; ties take the lowest rate.
    pub argmax_rate: Decimal,
    pub peak_revenue: Money,
}

/// Sweeps the rate grid under the default power-decay base model.
pub fn laffer_sweep(cfg: &SweepConfig) -> Result<SweepResult, ScenarioError> {
    laffer_sweep_with(cfg, &PowerDecay { gamma: cfg.elasticity_gamma })
}

/// Sweeps the rate grid under a caller-chosen base model.
pub fn laffer_sweep_with(
    cfg: &SweepConfig,
    model: &impl BaseModel,
) -> Result<SweepResult, ScenarioError> {
    cfg.validate()?;
    let mut points = Vec::with_capacity(cfg.rate_grid.len());
    let mut best: Option<(usize, f64)> = None;
    for (i, rate) in cfg.rate_grid.iter().enumerate() {
        let r = rational_to_f64(rate.as_rational());
        let base = model.modeled_base(cfg.base_b0, r);
        let revenue = r * base;
        if best.is_none_or(|(_, b)| revenue > b) {
            best = Some((i, revenue));
        }
        points.push(SweepPoint {
            rate: *rate,
            modeled_base: money_from_f64(base),
            revenue: money_from_f64(revenue),
        });
    }
    let (argmax_index, _) = best.expect("validated grid is non-empty");
    Ok(SweepResult {
        argmax_rate: cfg.rate_grid[argmax_index],
        peak_revenue: points[argmax_index].revenue,
        points,
    })
}

fn rational_to_f64(r: crate::money::Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn money_from_f64(minor: f64) -> Money {
    Money::from_minor((minor + 0.5).floor() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    #[test]
    fn flat_schedule_totals_population() {
        let flat = TaxSchedule::proportional(d("0.20"), Currency::gel());
        let out = compare_schedules(
            &[Money::from_major(1000)],
            &Currency::gel(),
            &[("flat", &flat)],
        )
        .unwrap();
        assert_eq!(out[0].total_revenue, Money::from_major(200));
    }

    #[test]
    fn empty_population_yields_zero() {
        let flat = TaxSchedule::proportional(d("0.20"), Currency::gel());
        let out = compare_schedules(&[], &Currency::gel(), &[("flat", &flat)]).unwrap();
        assert_eq!(out[0].total_revenue, Money::ZERO);
    }

    #[test]
    fn uk_two_bracket_population() {
        // Frozen from the per-lari oracle over the two-bracket table:
        // 9,441 is fully exempt; 20,000 leaves 10,559 taxable, all inside
        // the 20% band under the default pivot (2 * 9,441): 2,111.80.
        let uk = ComparatorSchedule::united_kingdom();
        let out = compare_schedules(
            &[Money::from_major(9_441), Money::from_major(20_000)],
            &Currency::from("GBP"),
            &[("uk", &uk.schedule)],
        )
        .unwrap();
        let single = uk.schedule.evaluate(Money::from_major(20_000)).unwrap();
        assert_eq!(single, Money::from_minor(211_180));
        assert_eq!(out[0].total_revenue, single);
        assert!(uk.approximate);
    }

    #[test]
    fn currency_mix_is_rejected() {
        let uk = ComparatorSchedule::united_kingdom();
        let err = compare_schedules(
            &[Money::from_major(1000)],
            &Currency::gel(),
            &[("uk", &uk.schedule)],
        )
        .unwrap_err();
        assert!(matches!(err, ScenarioError::CurrencyMix { .. }));
    }

    #[test]
    fn shipped_comparators_validate() {
        for comparator in ComparatorSchedule::shipped() {
            assert!(comparator.schedule.validate().is_empty(), "{}", comparator.country);
            assert!(comparator.approximate);
        }
    }

    #[test]
    fn sweep_endpoints_collect_nothing() {
        let result = laffer_sweep(&SweepConfig::new(Money::from_major(1_000_000))).unwrap();
        assert_eq!(result.points.first().unwrap().revenue, Money::ZERO);
        assert_eq!(result.points.last().unwrap().revenue, Money::ZERO);
    }

    #[test]
    fn sweep_peaks_inside_the_band() {
        let result = laffer_sweep(&SweepConfig::new(Money::from_major(1_000_000))).unwrap();
        assert!(result.argmax_rate >= d("0.34") && result.argmax_rate <= d("0.36"));
        assert!(result.peak_revenue > Money::ZERO);
    }

    #[test]
    fn sweep_is_unimodal_on_default_grid() {
        let result = laffer_sweep(&SweepConfig::new(Money::from_major(1_000_000))).unwrap();
        let peak = result
            .points
            .iter()
            .position(|p| p.rate == result.argmax_rate)
            .unwrap();
        for pair in result.points[..=peak].windows(2) {
            assert!(pair[0].revenue < pair[1].revenue);
        }
        for pair in result.points[peak..].windows(2) {
            assert!(pair[0].revenue > pair[1].revenue);
        }
    }

    #[test]
    fn sweep_validates_config() {
        let mut cfg = SweepConfig::new(Money::from_major(100));
        cfg.elasticity_gamma = 0.0;
        assert!(matches!(laffer_sweep(&cfg), Err(ScenarioError::BadGamma(_))));
        let mut cfg = SweepConfig::new(Money::from_major(100));
        cfg.rate_grid = vec![d("0.5"), d("0.4")];
        assert!(matches!(laffer_sweep(&cfg), Err(ScenarioError::BadGrid)));
        let mut cfg = SweepConfig::new(Money::from_major(100));
        cfg.rate_grid = vec![d("1.5")];
        assert!(matches!(laffer_sweep(&cfg), Err(ScenarioError::BadGrid)));
    }
}
