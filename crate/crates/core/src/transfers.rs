//! Municipal equalization-transfer allocator.
//!
//! The chain: a national pool G (floored at 4% of forecast nominal GDP) is
//! split 72/28 between self-governing cities and municipalities, each unit's
//! expenditure need E is its coefficient share of the group pool, own revenue
//! R is projected from three years of actuals plus the current-year forecast,
//! and the transfer is T = max(E - R, 0). Units whose revenues cover their
//! need receive nothing and do not disturb anyone else's allocation.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::money::{Decimal, Money, Rational};

/// Group share of the pool going to self-governing cities: 72%.
pub const CITY_SHARE: Rational = Rational::new_raw(18, 25);
/// Group share of the pool going to municipalities: 28%.
pub const MUNICIPALITY_SHARE: Rational = Rational::new_raw(7, 25);
/// The pool may not fall below this fraction of forecast nominal GDP: 4%.
pub const GDP_FLOOR_FRACTION: Rational = Rational::new_raw(1, 25);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransferError {
    #[error("nominal GDP forecast must be positive, got {0}")]
    NonPositiveGdp(Money),
    #[error("shares of {kind} group sum to {sum}, expected 1 (±1e-9): {ids:?}")]
    ShareSumViolation { kind: MunicipalityKind, sum: Decimal, ids: Vec<String> },
    #[error("coefficient share {share} of {id} outside [0,1]")]
    ShareOutOfRange { id: String, share: Decimal },
    #[error("negative revenue history for {id}")]
    NegativeRevenue { id: String },
    #[error("duplicate municipality id {0}")]
    DuplicateId(String),
    #[error("municipalities disagree on the plan year: {0} vs {1}")]
    PlanYearMismatch(i32, i32),
    #[error("city_share and municipality_share must be positive and sum to 1")]
    BadGroupShares,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MunicipalityKind {
    City,
    Municipality,
}

impl std::fmt::Display for MunicipalityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MunicipalityKind::City => "city",
            MunicipalityKind::Municipality => "municipality",
        })
    }
}

/// A self-governing unit in the transfer registry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Municipality {
    pub id: String,
    pub kind: MunicipalityKind,
    /// Combined statistical/equalization coefficient share within the kind group.
    pub coefficient_share: Decimal,
    /// Own-revenue actuals for years t-3, t-2, t-1.
    pub own_revenue_actuals: [Money; 3],
    /// Own-revenue forecast for the current year t.
    pub own_revenue_forecast_current: Money,
    /// The plan year t+1 the allocation is computed for.
    pub plan_year: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferParams {
    pub nominal_gdp_forecast: Money,
    /// Pool size proposed by the minister's individual administrative act.
    pub proposed_g: Money,
    pub city_share: Decimal,
    pub municipality_share: Decimal,
    pub gdp_floor_fraction: Decimal,
}

impl TransferParams {
    pub fn new(nominal_gdp_forecast: Money, proposed_g: Money) -> TransferParams {
        TransferParams {
            nominal_gdp_forecast,
            proposed_g,
            city_share: Decimal::new(72, 100),
            municipality_share: Decimal::new(28, 100),
            gdp_floor_fraction: Decimal::new(4, 100),
        }
    }

    fn validate(&self) -> Result<(), TransferError> {
        if self.nominal_gdp_forecast <= Money::ZERO {
            return Err(TransferError::NonPositiveGdp(self.nominal_gdp_forecast));
        }
        let sum = self.city_share.as_rational() + self.municipality_share.as_rational();
        if sum != Rational::from_integer(1)
            || self.city_share <= Decimal::ZERO
            || self.municipality_share <= Decimal::ZERO
        {
            return Err(TransferError::BadGroupShares);
        }
        Ok(())
    }
}

/// One unit's line in the allocation: need, forecast revenue, transfer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferLine {
    pub id: String,
    pub kind: MunicipalityKind,
    pub expenditure_need: Money,
    pub forecast_revenue: Money,
    pub transfer: Money,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferAllocation {
    pub plan_year: i32,
    pub pool: Money,
    pub pool_city: Money,
    pub pool_municipality: Money,
    /// Per-unit lines, ordered by id.
    pub lines: Vec<TransferLine>,
    pub total_city_transfers: Money,
    pub total_municipality_transfers: Money,
    /// Pass-through grants for delegated powers; no formula applies.
    #[serde(default)]
    pub targeted_transfers: BTreeMap<String, Money>,
    /// Pass-through financial assistance outside the other two kinds.
    #[serde(default)]
    pub special_transfers: BTreeMap<String, Money>,
}

impl TransferAllocation {
    /// Equalization plus pass-through amounts flowing to one unit.
    pub fn total_for(&self, id: &str) -> Money {
        let equalization = self
            .lines
            .iter()
            .find(|l| l.id == id)
            .map_or(Money::ZERO, |l| l.transfer);
        let targeted = self.targeted_transfers.get(id).copied().unwrap_or(Money::ZERO);
        let special = self.special_transfers.get(id).copied().unwrap_or(Money::ZERO);
        equalization + targeted + special
    }
}

/// The pool size: the proposed amount, floored at 4% of forecast nominal GDP.
pub fn determine_g(params: &TransferParams) -> Result<Money, TransferError> {
    params.validate()?;
    let floor = Money::round_half_up(
        params.gdp_floor_fraction.as_rational() * params.nominal_gdp_forecast.as_rational(),
    );
    Ok(params.proposed_g.max(floor))
}

/// Splits the pool 72/28; the rounding remainder stays with the city pool.
pub fn split_g(g: Money, params: &TransferParams) -> (Money, Money) {
    let g_m = Money::round_half_up(params.municipality_share.as_rational() * g.as_rational());
    (g - g_m, g_m)
}

/// One unit's expenditure need: its share of the group pool.
pub fn expenditure_need(m: &Municipality, g_kind: Money) -> Money {
    Money::round_half_up(m.coefficient_share.as_rational() * g_kind.as_rational())
}

/// Projects own revenue for the plan year: an ordinary least-squares line
/// through the three actuals and the current-year forecast, evaluated one
/// year ahead and floored at zero.
pub fn forecast_r(m: &Municipality) -> Money {
    let ys: Vec<Rational> = m
        .own_revenue_actuals
        .iter()
        .chain(std::iter::once(&m.own_revenue_forecast_current))
        .map(|v| v.as_rational())
        .collect();
    let projected = ols_projection(&ys);
    Money::round_half_up(projected).max(Money::ZERO)
}

/// Least-squares line through (0,y0)..(n-1,yn-1), evaluated at x = n.
fn ols_projection(ys: &[Rational]) -> Rational {
    let n = ys.len() as i128;
    let mean_x = Rational::new(n - 1, 2);
    let mean_y: Rational = ys.iter().sum::<Rational>() / Rational::from_integer(n);
    let mut num = Rational::zero();
    let mut den = Rational::zero();
    for (i, y) in ys.iter().enumerate() {
        let dx = Rational::from_integer(i as i128) - mean_x;
        num += dx * (*y - mean_y);
        den += dx * dx;
    }
    let slope = num / den;
    mean_y + slope * (Rational::from_integer(n) - mean_x)
}

/// Runs the whole chain for a registry of municipalities.
pub fn allocate(
    municipalities: &[Municipality],
    params: &TransferParams,
) -> Result<TransferAllocation, TransferError> {
    allocate_with(municipalities, params, forecast_r)
}

/// `allocate` with a pluggable revenue-forecast method.
pub fn allocate_with(
    municipalities: &[Municipality],
    params: &TransferParams,
    forecast: impl Fn(&Municipality) -> Money,
) -> Result<TransferAllocation, TransferError> {
    validate_registry(municipalities)?;
    let plan_year = municipalities.first().map_or(0, |m| m.plan_year);
    let g = determine_g(params)?;
    let (g_city, g_m) = split_g(g, params);

    let mut lines = Vec::with_capacity(municipalities.len());
    for kind in [MunicipalityKind::City, MunicipalityKind::Municipality] {
        let pool = match kind {
            MunicipalityKind::City => g_city,
            MunicipalityKind::Municipality => g_m,
        };
        let group: Vec<&Municipality> =
            municipalities.iter().filter(|m| m.kind == kind).collect();
        let needs = conserving_needs(&group, pool);
        for (m, need) in group.iter().zip(needs) {
            let revenue = forecast(m);
            let transfer = (need - revenue).max(Money::ZERO);
            lines.push(TransferLine {
                id: m.id.clone(),
                kind,
                expenditure_need: need,
                forecast_revenue: revenue,
                transfer,
            });
        }
    }
    lines.sort_by(|a, b| a.id.cmp(&b.id));

    let total_for = |kind| {
        lines
            .iter()
            .filter(|l| l.kind == kind)
            .map(|l| l.transfer)
            .sum()
    };
    Ok(TransferAllocation {
        plan_year,
        pool: g,
        pool_city: g_city,
        pool_municipality: g_m,
        total_city_transfers: total_for(MunicipalityKind::City),
        total_municipality_transfers: total_for(MunicipalityKind::Municipality),
        lines,
        targeted_transfers: BTreeMap::new(),
        special_transfers: BTreeMap::new(),
    })
}

/// Per-unit needs that sum to the group pool exactly: exact shares are
/// floored, then the leftover minor units go to the largest shares first
/// (ties broken by id) so the result is deterministic.
fn conserving_needs(group: &[&Municipality], pool: Money) -> Vec<Money> {
    if group.is_empty() {
        return Vec::new();
    }
    let exact: Vec<Rational> = group
        .iter()
        .map(|m| m.coefficient_share.as_rational() * pool.as_rational())
        .collect();
    let mut needs: Vec<i64> = exact
        .iter()
        .map(|e| i64::try_from(e.floor().to_integer()).expect("need exceeds 64-bit minor units"))
        .collect();
    let mut leftover = pool.minor_units() - needs.iter().sum::<i64>();
    let mut order: Vec<usize> = (0..group.len()).collect();
    order.sort_by(|&a, &b| {
        group[b]
            .coefficient_share
            .cmp(&group[a].coefficient_share)
            .then_with(|| group[a].id.cmp(&group[b].id))
    });
    let mut cursor = order.iter().cycle();
    while leftover > 0 {
        needs[*cursor.next().expect("non-empty order")] += 1;
        leftover -= 1;
    }
    needs.into_iter().map(Money::from_minor).collect()
}

fn validate_registry(municipalities: &[Municipality]) -> Result<(), TransferError> {
    let mut seen = std::collections::BTreeSet::new();
    let mut plan_year: Option<i32> = None;
    for m in municipalities {
        if !seen.insert(m.id.as_str()) {
            return Err(TransferError::DuplicateId(m.id.clone()));
        }
        if !m.coefficient_share.within(Decimal::ZERO, Decimal::ONE) {
            return Err(TransferError::ShareOutOfRange {
                id: m.id.clone(),
                share: m.coefficient_share,
            });
        }
        if m.own_revenue_actuals.iter().any(|v| v.is_negative())
            || m.own_revenue_forecast_current.is_negative()
        {
            return Err(TransferError::NegativeRevenue { id: m.id.clone() });
        }
        match plan_year {
            None => plan_year = Some(m.plan_year),
            Some(y) if y != m.plan_year => {
                return Err(TransferError::PlanYearMismatch(y, m.plan_year))
            }
            _ => {}
        }
    }
    for kind in [MunicipalityKind::City, MunicipalityKind::Municipality] {
        let group: Vec<&Municipality> =
            municipalities.iter().filter(|m| m.kind == kind).collect();
        if group.is_empty() {
            continue;
        }
        let sum: Rational = group.iter().map(|m| m.coefficient_share.as_rational()).sum();
        let tolerance = Rational::new(1, 1_000_000_000);
        let deviation = (sum - Rational::from_integer(1)).abs();
        if deviation > tolerance {
            return Err(TransferError::ShareSumViolation {
                kind,
                sum: Decimal::new(*sum.numer(), *sum.denom()),
                ids: group.iter().map(|m| m.id.clone()).collect(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(id: &str, kind: MunicipalityKind, share: &str) -> Municipality {
        Municipality {
            id: id.to_string(),
            kind,
            coefficient_share: share.parse().unwrap(),
            own_revenue_actuals: [Money::ZERO; 3],
            own_revenue_forecast_current: Money::ZERO,
            plan_year: 2019,
        }
    }

    fn millions(m: i64) -> Money {
        Money::from_major(m * 1_000_000)
    }

    #[test]
    fn pool_floor_binds() {
        let params = TransferParams::new(millions(40_000), millions(1_400));
        assert_eq!(determine_g(&params).unwrap(), millions(1_600));
    }

    #[test]
    fn pool_floor_slack() {
        let params = TransferParams::new(millions(40_000), millions(2_000));
        assert_eq!(determine_g(&params).unwrap(), millions(2_000));
    }

    #[test]
    fn pool_floor_boundary_equality() {
        let params = TransferParams::new(millions(40_000), millions(1_600));
        assert_eq!(determine_g(&params).unwrap(), millions(1_600));
    }

    #[test]
    fn non_positive_gdp_rejected() {
        let params = TransferParams::new(Money::ZERO, millions(1_400));
        assert!(matches!(determine_g(&params), Err(TransferError::NonPositiveGdp(_))));
    }

    #[test]
    fn split_is_72_28_and_conserves() {
        let params = TransferParams::new(millions(40_000), millions(1_400));
        assert_eq!(split_g(Money::from_major(1000), &params), (Money::from_major(720), Money::from_major(280)));
        assert_eq!(split_g(Money::ZERO, &params), (Money::ZERO, Money::ZERO));
        // One tetri: the remainder stays with the city pool.
        assert_eq!(split_g(Money::from_minor(1), &params), (Money::from_minor(1), Money::ZERO));
        assert_eq!(split_g(millions(1_600), &params), (millions(1_152), millions(448)));
    }

    #[test]
    fn expenditure_need_is_share_of_pool() {
        let m = unit("tbilisi", MunicipalityKind::City, "0.6");
        assert_eq!(expenditure_need(&m, Money::from_major(100)), Money::from_major(60));
        let z = unit("zero", MunicipalityKind::City, "0");
        assert_eq!(expenditure_need(&z, Money::from_major(100)), Money::ZERO);
    }

    #[test]
    fn forecast_follows_a_perfect_line() {
        let mut m = unit("a", MunicipalityKind::City, "1");
        m.own_revenue_actuals = [Money::from_major(90), Money::from_major(100), Money::from_major(110)];
        m.own_revenue_forecast_current = Money::from_major(120);
        assert_eq!(forecast_r(&m), Money::from_major(130));
    }

    #[test]
    fn forecast_flat_series() {
        let mut m = unit("a", MunicipalityKind::City, "1");
        m.own_revenue_actuals = [Money::from_major(100); 3];
        m.own_revenue_forecast_current = Money::from_major(100);
        assert_eq!(forecast_r(&m), Money::from_major(100));
    }

    #[test]
    fn forecast_floors_negative_projection() {
        let mut m = unit("a", MunicipalityKind::City, "1");
        m.own_revenue_actuals = [Money::from_major(30), Money::from_major(20), Money::from_major(10)];
        m.own_revenue_forecast_current = Money::ZERO;
        assert_eq!(forecast_r(&m), Money::ZERO);
    }

    #[test]
    fn transfer_is_need_minus_revenue_floored() {
        let mut a = unit("a", MunicipalityKind::City, "0.5");
        let mut b = unit("b", MunicipalityKind::City, "0.5");
        // Flat histories keep R at the chosen level.
        a.own_revenue_actuals = [Money::from_major(30); 3];
        a.own_revenue_forecast_current = Money::from_major(30);
        b.own_revenue_actuals = [Money::from_major(60); 3];
        b.own_revenue_forecast_current = Money::from_major(60);
        let params = TransferParams::new(Money::from_major(2_500), Money::from_major(100));
        // G = 100 (floor 4% of 2,500 binds at equality), city pool 72,
        // so each of the two cities needs 36.
        let allocation = allocate(&[a, b], &params).unwrap();
        let la = &allocation.lines[0];
        let lb = &allocation.lines[1];
        assert_eq!(la.expenditure_need, Money::from_major(36));
        assert_eq!(la.transfer, Money::from_major(6));
        assert_eq!(lb.transfer, Money::ZERO);
    }

    #[test]
    fn share_sum_violation_lists_the_group() {
        let a = unit("a", MunicipalityKind::City, "0.5");
        let b = unit("b", MunicipalityKind::City, "0.4");
        let params = TransferParams::new(millions(40_000), millions(1_400));
        match allocate(&[a, b], &params) {
            Err(TransferError::ShareSumViolation { kind, ids, .. }) => {
                assert_eq!(kind, MunicipalityKind::City);
                assert_eq!(ids, vec!["a".to_string(), "b".to_string()]);
            }
            other => panic!("expected share-sum violation, got {other:?}"),
        }
    }

    #[test]
    fn needs_conserve_group_pool_exactly() {
        // Three equal shares of 100.00 cannot round independently; the
        // leftover tetri go to the first ids among equal shares.
        let thirds = ["a", "b", "c"].map(|id| {
            let mut m = unit(id, MunicipalityKind::Municipality, "1/3");
            m.own_revenue_actuals = [Money::ZERO; 3];
            m
        });
        let params = TransferParams::new(Money::from_major(2_500), Money::from_major(100));
        let allocation = allocate(&thirds, &params).unwrap();
        let total: Money = allocation.lines.iter().map(|l| l.expenditure_need).sum();
        assert_eq!(total, allocation.pool_municipality);
    }

    #[test]
    fn zero_revenue_receives_full_need() {
        let m = unit("solo", MunicipalityKind::City, "1");
        let params = TransferParams::new(Money::from_major(2_500), Money::from_major(100));
        let allocation = allocate(&[m], &params).unwrap();
        assert_eq!(allocation.lines[0].transfer, allocation.lines[0].expenditure_need);
    }

    #[test]
    fn plan_year_must_agree() {
        let a = unit("a", MunicipalityKind::City, "1");
        let mut b = unit("b", MunicipalityKind::Municipality, "1");
        b.plan_year = 2020;
        let params = TransferParams::new(millions(40_000), millions(1_400));
        assert!(matches!(
            allocate(&[a, b], &params),
            Err(TransferError::PlanYearMismatch(2019, 2020))
        ));
    }
}
