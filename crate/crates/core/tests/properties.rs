//! Property tests for the engine invariants.
//!
//! Covered here:
//! - schedule monotonicity, proportional exactness, marginal bounds,
//!   the per-lari oracle equivalence, and the regressive-rate property
//! - vehicle duty linearity, import VAT dominance, zero-retention under
//!   the distribution-based profit model, regime exclusivity
//! - transfer conservation, non-negativity, floor monotonicity, share
//!   rescaling, exclusion idempotence
//! - budget conservation and permutation invariance
//! - schedule dominance and the flat-rate identity

use fiscal_core::budget::{allocate_revenue, consolidate, LedgerEntry, RevenueLedger, TaxKind};
use fiscal_core::geo_tax::{
    import_duty, profit_tax, turnover_regime_tax, vat, vehicle_property_tax_amount, DutyClass,
    EnterpriseRecord, ImportDeclaration, ImportGoods, ImportOperation, ProfitModel, Regime,
    VatEvent,
};
use fiscal_core::scenarios::compare_schedules;
use fiscal_core::transfers::{
    allocate, determine_g, Municipality, MunicipalityKind, TransferParams,
};
use fiscal_core::{Bracket, Currency, Decimal, Money, Rational, TaxSchedule};
use proptest::prelude::*;

fn d(numer: i128, denom: i128) -> Decimal {
    Decimal::new(numer, denom)
}

// ---------------------------------------------------------------------------
// Schedule strategies
// ---------------------------------------------------------------------------

/// Progressive or regressive schedule with an unbounded top bracket.
fn arb_bracket_schedule(progressive: bool) -> impl Strategy<Value = TaxSchedule> {
    let bounds = proptest::collection::btree_set(1i64..=5_000, 0..=4);
    let raw_rates = proptest::collection::vec(0u32..=10_000, 1..=5);
    let minimum = 0i64..=2_000;
    (bounds, raw_rates, minimum).prop_map(move |(bounds, mut raw, minimum)| {
        let bounds: Vec<i64> = bounds.into_iter().collect();
        raw.truncate(bounds.len() + 1);
        while raw.len() < bounds.len() + 1 {
            raw.push(raw[raw.len() - 1]);
        }
        raw.sort_unstable();
        if !progressive {
            raw.reverse();
        }
        let mut brackets = Vec::new();
        let mut lower = Money::ZERO;
        for (i, bound) in bounds.iter().enumerate() {
            let upper = Money::from_major(*bound);
            brackets.push(Bracket::new(lower, Some(upper), d(raw[i] as i128, 10_000)));
            lower = upper;
        }
        brackets.push(Bracket::new(lower, None, d(raw[bounds.len()] as i128, 10_000)));
        let schedule = if progressive {
            TaxSchedule::progressive(brackets, Currency::gel())
        } else {
            TaxSchedule::regressive(brackets, Currency::gel())
        };
        schedule.with_minimum(Money::from_major(minimum))
    })
}

fn arb_schedule() -> impl Strategy<Value = TaxSchedule> {
    prop_oneof![
        (0u32..=10_000, 0i64..=2_000).prop_map(|(r, m)| {
            TaxSchedule::proportional(d(r as i128, 10_000), Currency::gel())
                .with_minimum(Money::from_major(m))
        }),
        arb_bracket_schedule(true),
        arb_bracket_schedule(false),
        (0i64..=100_000, 0i64..=2_000).prop_map(|(a, m)| {
            TaxSchedule::fixed(Money::from_minor(a), Currency::gel())
                .with_minimum(Money::from_major(m))
        }),
    ]
}

proptest! {
    #[test]
    fn evaluation_is_monotone(schedule in arb_schedule(), a in 0i64..=10_000_000, b in 0i64..=10_000_000) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let t_lo = schedule.evaluate(Money::from_minor(lo)).unwrap();
        let t_hi = schedule.evaluate(Money::from_minor(hi)).unwrap();
        prop_assert!(t_lo <= t_hi);
    }

    #[test]
    fn proportional_is_exact_before_rounding(
        rate in 0u32..=10_000,
        minimum in 0i64..=1_000_000,
        base in 0i64..=100_000_000,
    ) {
        let schedule = TaxSchedule::proportional(d(rate as i128, 10_000), Currency::gel())
            .with_minimum(Money::from_minor(minimum));
        let exact = schedule.evaluate_exact(Money::from_minor(base)).unwrap();
        let expected = Rational::new(rate as i128, 10_000)
            * Rational::from_integer((base - minimum).max(0) as i128);
        prop_assert_eq!(exact, expected);
    }

    #[test]
    fn progressive_tax_is_bounded_by_top_rate(
        schedule in arb_bracket_schedule(true),
        base in 1i64..=10_000_000,
    ) {
        let brackets = match &schedule.kind {
            fiscal_core::ScheduleKind::Progressive { brackets, .. } => brackets.clone(),
            _ => unreachable!(),
        };
        let top = brackets.last().unwrap().rate.as_rational();
        let base = Money::from_minor(base);
        let exact = schedule.evaluate_exact(base).unwrap();
        prop_assert!(exact <= top * base.as_rational());
        prop_assert!(schedule.effective_rate(base).unwrap() <= top);
    }

    #[test]
    fn regressive_effective_rate_never_rises(schedule in arb_bracket_schedule(false)) {
        let mut schedule = schedule;
        schedule.non_taxable_minimum = Money::ZERO;
        let mut previous: Option<Rational> = None;
        for base in (1i64..=600_000).step_by(7_919) {
            let rate = schedule.effective_rate(Money::from_minor(base)).unwrap();
            if let Some(prev) = previous {
                prop_assert!(rate <= prev);
            }
            previous = Some(rate);
        }
    }
}

/// Per-lari brute force: each whole-lari slice taxed at its bracket's rate.
fn per_lari_oracle(schedule: &TaxSchedule, base_lari: i64) -> Money {
    let brackets = match &schedule.kind {
        fiscal_core::ScheduleKind::Progressive { brackets, .. } => brackets,
        _ => panic!("oracle covers bracket schedules"),
    };
    let minimum_lari = schedule.non_taxable_minimum.minor_units() / 100;
    let effective = (base_lari - minimum_lari).max(0);
    let mut tax = Rational::new_raw(0, 1);
    for lari in 0..effective {
        let slice = Money::from_major(lari);
        for b in brackets {
            if slice >= b.lower && b.upper.is_none_or(|u| slice < u) {
                tax += b.rate.as_rational() * Rational::from_integer(100);
            }
        }
    }
    Money::round_half_up(tax)
}

#[test]
fn marginal_evaluation_matches_the_per_lari_oracle() {
    let schedule = fiscal_core::catalog::income_2004();
    for lari in 0..=2_000 {
        assert_eq!(
            schedule.evaluate(Money::from_major(lari)).unwrap(),
            per_lari_oracle(&schedule, lari),
            "base {lari} lari"
        );
    }
}

// ---------------------------------------------------------------------------
// Georgian calculators
// ---------------------------------------------------------------------------

fn vehicle_decl(engine_cc: u32, years: u32) -> ImportDeclaration {
    ImportDeclaration {
        operation: ImportOperation::Import,
        customs_value: Money::from_major(10_000),
        duty_class: DutyClass::Pct12,
        excise_amount: Money::ZERO,
        goods: Some(ImportGoods::Vehicle { engine_cc, years_in_service: years }),
    }
}

proptest! {
    #[test]
    fn vehicle_duty_is_linear(quarter_cc in 1u32..=2_500, years in 0u32..=30, k in 1u32..=4) {
        // Multiples of four keep every quarter-tetri term whole, so the
        // rounded results are exactly linear.
        let cc = quarter_cc * 4;
        let base = import_duty(&vehicle_decl(cc, years)).unwrap();
        let scaled = import_duty(&vehicle_decl(cc * k, years)).unwrap();
        prop_assert_eq!(scaled, Money::from_minor(base.minor_units() * k as i64));
        let step_low = import_duty(&vehicle_decl(cc, years + 1)).unwrap() - base;
        let step_high = import_duty(&vehicle_decl(cc, years + 2)).unwrap()
            - import_duty(&vehicle_decl(cc, years + 1)).unwrap();
        prop_assert_eq!(step_low, step_high);
    }

    #[test]
    fn vehicle_duty_at_zero_years_is_per_cc_base(engine_cc in 1u32..=10_000) {
        let duty = import_duty(&vehicle_decl(engine_cc, 0)).unwrap();
        prop_assert_eq!(duty, Money::from_minor(engine_cc as i64 * 5));
    }

    #[test]
    fn import_vat_dominates_domestic(
        value in 0i64..=1_000_000_000,
        duty in 0i64..=100_000_000,
        excise in 0i64..=100_000_000,
    ) {
        let import = vat(VatEvent::Import {
            customs_value: Money::from_minor(value),
            duty: Money::from_minor(duty),
            excise: Money::from_minor(excise),
        }).unwrap();
        let domestic = vat(VatEvent::Domestic { turnover: Money::from_minor(value) }).unwrap();
        prop_assert!(import.tax >= domestic.tax);
    }

    #[test]
    fn zero_retention_pays_no_profit_tax(
        profit in 0i64..=1_000_000_000,
        turnover in 0i64..=1_000_000_000,
        gross_up in any::<bool>(),
    ) {
        let ent = EnterpriseRecord {
            regime: Regime::Standard,
            taxable_profit: Money::from_minor(profit),
            distributed_profit: Money::ZERO,
            non_business_expense: Money::ZERO,
            asset_value_begin: Money::ZERO,
            asset_value_end: Money::ZERO,
            annual_turnover: Money::from_minor(turnover),
            documented_expense_share: Decimal::ZERO,
            employs_hired_labor: false,
        };
        prop_assert_eq!(profit_tax(&ent, ProfitModel::Estonian, gross_up).unwrap(), Money::ZERO);
    }

    #[test]
    fn exactly_one_regime_path_applies(
        regime in prop_oneof![Just(Regime::Standard), Just(Regime::Micro), Just(Regime::Small)],
        turnover in 0i64..=25_000,
    ) {
        let ent = EnterpriseRecord {
            regime,
            taxable_profit: Money::from_major(100),
            distributed_profit: Money::ZERO,
            non_business_expense: Money::ZERO,
            asset_value_begin: Money::ZERO,
            asset_value_end: Money::ZERO,
            annual_turnover: Money::from_major(turnover),
            documented_expense_share: Decimal::ZERO,
            employs_hired_labor: false,
        };
        let profit_path = profit_tax(&ent, ProfitModel::Classic, false);
        let turnover_path = turnover_regime_tax(&ent);
        prop_assert_eq!(profit_path.is_ok(), regime == Regime::Standard);
        prop_assert_eq!(turnover_path.is_ok(), regime != Regime::Standard);
    }
}

#[test]
fn vehicle_property_table_is_a_non_increasing_step_function() {
    for age in 0..=30u32 {
        assert!(vehicle_property_tax_amount(age + 1) <= vehicle_property_tax_amount(age));
    }
}

// ---------------------------------------------------------------------------
// Transfers
// ---------------------------------------------------------------------------

/// A registry whose shares are k_i / sum(k) within each kind group.
fn registry(city_weights: &[i64], muni_weights: &[i64], revenues_major: &[i64]) -> Vec<Municipality> {
    let mut out = Vec::new();
    let mut revenue_iter = revenues_major.iter().copied().cycle();
    for (kind, weights) in [
        (MunicipalityKind::City, city_weights),
        (MunicipalityKind::Municipality, muni_weights),
    ] {
        let total: i64 = weights.iter().sum();
        for (i, w) in weights.iter().enumerate() {
            let revenue = Money::from_major(revenue_iter.next().unwrap_or(0));
            out.push(Municipality {
                id: format!("{kind}-{i}"),
                kind,
                coefficient_share: Decimal::new(*w as i128, total as i128),
                own_revenue_actuals: [revenue; 3],
                own_revenue_forecast_current: revenue,
                plan_year: 2019,
            });
        }
    }
    out
}

proptest! {
    #[test]
    fn allocation_conserves_and_stays_non_negative(
        city_weights in proptest::collection::vec(1i64..=50, 1..=6),
        muni_weights in proptest::collection::vec(1i64..=50, 1..=6),
        revenues in proptest::collection::vec(0i64..=500, 1..=12),
        proposed in 0i64..=5_000,
        gdp in 1i64..=100_000,
    ) {
        let params = TransferParams::new(Money::from_major(gdp), Money::from_major(proposed));
        let units = registry(&city_weights, &muni_weights, &revenues);
        let allocation = allocate(&units, &params).unwrap();
        let city_needs: Money = allocation.lines.iter()
            .filter(|l| l.kind == MunicipalityKind::City)
            .map(|l| l.expenditure_need)
            .sum();
        let muni_needs: Money = allocation.lines.iter()
            .filter(|l| l.kind == MunicipalityKind::Municipality)
            .map(|l| l.expenditure_need)
            .sum();
        prop_assert_eq!(city_needs, allocation.pool_city);
        prop_assert_eq!(muni_needs, allocation.pool_municipality);
        prop_assert_eq!(allocation.pool_city + allocation.pool_municipality, allocation.pool);
        for line in &allocation.lines {
            prop_assert!(line.transfer >= Money::ZERO);
        }
    }

    #[test]
    fn pool_never_shrinks_when_gdp_grows(
        proposed in 0i64..=5_000,
        gdp in 1i64..=100_000,
        bump in 0i64..=50_000,
    ) {
        let low = determine_g(&TransferParams::new(Money::from_major(gdp), Money::from_major(proposed))).unwrap();
        let high = determine_g(&TransferParams::new(Money::from_major(gdp + bump), Money::from_major(proposed))).unwrap();
        prop_assert!(high >= low);
    }

    #[test]
    fn higher_revenue_never_raises_a_transfer(
        revenue in 0i64..=1_000,
        bump in 0i64..=1_000,
    ) {
        let params = TransferParams::new(Money::from_major(50_000), Money::from_major(2_000));
        let base = registry(&[1], &[1], &[revenue]);
        let bumped = registry(&[1], &[1], &[revenue + bump]);
        let t_base = allocate(&base, &params).unwrap().lines[0].transfer;
        let t_bumped = allocate(&bumped, &params).unwrap().lines[0].transfer;
        prop_assert!(t_bumped <= t_base);
    }

    #[test]
    fn rescaled_shares_change_nothing(
        weights in proptest::collection::vec(1i64..=50, 2..=6),
        scale in 2i64..=9,
    ) {
        let params = TransferParams::new(Money::from_major(50_000), Money::from_major(2_000));
        let plain = registry(&weights, &[], &[100]);
        let scaled_weights: Vec<i64> = weights.iter().map(|w| w * scale).collect();
        let scaled = registry(&scaled_weights, &[], &[100]);
        prop_assert_eq!(
            allocate(&plain, &params).unwrap().lines,
            allocate(&scaled, &params).unwrap().lines
        );
    }

    #[test]
    fn saturated_units_leave_others_untouched(extra_revenue in 0i64..=100_000) {
        // One city is always saturated; its revenue level must not leak
        // into the other city's transfer.
        let params = TransferParams::new(Money::from_major(50_000), Money::from_major(2_000));
        let make = |saturated_revenue: i64| {
            let mut units = registry(&[3, 1], &[], &[0]);
            units[1].own_revenue_actuals = [Money::from_major(saturated_revenue); 3];
            units[1].own_revenue_forecast_current = Money::from_major(saturated_revenue);
            units
        };
        let a = allocate(&make(10_000), &params).unwrap();
        let b = allocate(&make(10_000 + extra_revenue), &params).unwrap();
        prop_assert_eq!(a.lines[1].transfer, Money::ZERO);
        prop_assert_eq!(a.lines[0].transfer, b.lines[0].transfer);
    }
}

// ---------------------------------------------------------------------------
// Budget
// ---------------------------------------------------------------------------

fn arb_ledger() -> impl Strategy<Value = RevenueLedger> {
    let entry = (
        prop_oneof![
            Just(TaxKind::Income),
            Just(TaxKind::Profit),
            Just(TaxKind::Vat),
            Just(TaxKind::Excise),
            Just(TaxKind::ImportDuty),
            Just(TaxKind::Property),
        ],
        0i64..=1_000_000_000,
        0usize..5,
        any::<bool>(),
    )
        .prop_map(|(tax_kind, amount, j, in_ar)| LedgerEntry {
            tax_kind,
            amount: Money::from_minor(amount),
            jurisdiction: format!("m{j}"),
            in_autonomous_republic: in_ar,
        });
    proptest::collection::vec(entry, 0..40)
        .prop_map(|entries| RevenueLedger { entries, plan_year: None })
}

proptest! {
    #[test]
    fn revenue_allocation_conserves_totals(ledger in arb_ledger()) {
        let report = allocate_revenue(&ledger).unwrap();
        let input: Money = ledger.entries.iter().map(|e| e.amount).sum();
        let output = report.state_total + report.local_totals.values().copied().sum::<Money>();
        prop_assert_eq!(input, output);
        prop_assert_eq!(report.consolidated_total, output);
    }

    #[test]
    fn entry_order_never_matters(ledger in arb_ledger().prop_flat_map(|l| {
        let len = l.entries.len();
        (Just(l), proptest::collection::vec(any::<usize>(), len..=len))
    })) {
        let (ledger, keys) = ledger;
        let baseline = allocate_revenue(&ledger).unwrap();
        let mut shuffled: Vec<(usize, LedgerEntry)> =
            keys.into_iter().zip(ledger.entries.iter().cloned()).collect();
        shuffled.sort_by_key(|(k, _)| *k);
        let permuted = RevenueLedger {
            entries: shuffled.into_iter().map(|(_, e)| e).collect(),
            plan_year: None,
        };
        let report = allocate_revenue(&permuted).unwrap();
        prop_assert_eq!(baseline.state_total, report.state_total);
        prop_assert_eq!(baseline.local_totals, report.local_totals);
        prop_assert_eq!(baseline.consolidated_total, report.consolidated_total);
    }

    #[test]
    fn consolidation_preserves_the_consolidated_total(
        ledger in arb_ledger(),
        weights in proptest::collection::vec(1i64..=20, 1..=5),
    ) {
        let mut ledger = ledger;
        ledger.plan_year = Some(2019);
        // Give every possible transfer target a local line.
        for i in 0..weights.len() {
            ledger.entries.push(LedgerEntry {
                tax_kind: TaxKind::Property,
                amount: Money::from_major(1),
                jurisdiction: format!("city-{i}"),
                in_autonomous_republic: false,
            });
        }
        let report = allocate_revenue(&ledger).unwrap();
        let params = TransferParams::new(Money::from_major(50_000), Money::from_major(2_000));
        let transfers = allocate(&registry(&weights, &[], &[0]), &params).unwrap();
        let consolidated = consolidate(&report, &transfers).unwrap();
        prop_assert_eq!(consolidated.consolidated_total, report.consolidated_total);
        let moved: Money = consolidated.transfer_lines.iter().map(|t| t.amount).sum();
        prop_assert_eq!(report.state_total - consolidated.state_total, moved);
    }
}

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

proptest! {
    #[test]
    fn pointwise_dominant_schedule_collects_at_least_as_much(
        rate_low in 0u32..=9_000,
        rate_gap in 0u32..=1_000,
        incomes in proptest::collection::vec(0i64..=10_000_000, 0..30),
    ) {
        let low = TaxSchedule::proportional(d(rate_low as i128, 10_000), Currency::gel());
        let high = TaxSchedule::proportional(d((rate_low + rate_gap) as i128, 10_000), Currency::gel());
        let incomes: Vec<Money> = incomes.into_iter().map(Money::from_minor).collect();
        let out = compare_schedules(
            &incomes,
            &Currency::gel(),
            &[("low", &low), ("high", &high)],
        ).unwrap();
        prop_assert!(out[1].total_revenue >= out[0].total_revenue);
    }

    #[test]
    fn flat_rate_total_is_rate_times_income_sum(
        rate in 0u32..=10_000,
        incomes in proptest::collection::vec(0i64..=10_000_000, 0..30),
    ) {
        let schedule = TaxSchedule::proportional(d(rate as i128, 10_000), Currency::gel());
        let incomes: Vec<Money> = incomes.into_iter().map(Money::from_minor).collect();
        let out = compare_schedules(&incomes, &Currency::gel(), &[("flat", &schedule)]).unwrap();
        let total: Money = incomes.iter().copied().sum();
        let expected = Money::round_half_up(
            Rational::new(rate as i128, 10_000) * total.as_rational(),
        );
        prop_assert_eq!(out[0].total_revenue, expected);
    }
}
