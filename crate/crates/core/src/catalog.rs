//! Shipped schedule defaults: the Georgian rules plus the comparator
//! approximations, used by configs and the verification suites.

use crate::money::{Currency, Decimal, Money};
use crate::scenarios::ComparatorSchedule;
use crate::schedules::{Bracket, TaxSchedule};

/// The flat 20% income-tax schedule in force since 2009.
pub fn income_flat() -> TaxSchedule {
    TaxSchedule::proportional(Decimal::new(20, 100), Currency::gel())
}

/// The pre-2005 four-bracket progressive schedule.
///
/// Historical rate tables disagree on the middle boundary (359 against
/// 351); the shipped table uses the contiguous repair 0/200/350/600.
pub fn income_2004() -> TaxSchedule {
    TaxSchedule::progressive(
        vec![
            Bracket::new(Money::ZERO, Some(Money::from_major(200)), Decimal::new(12, 100)),
            Bracket::new(Money::from_major(200), Some(Money::from_major(350)), Decimal::new(15, 100)),
            Bracket::new(Money::from_major(350), Some(Money::from_major(600)), Decimal::new(17, 100)),
            Bracket::new(Money::from_major(600), None, Decimal::new(20, 100)),
        ],
        Currency::gel(),
    )
}

/// Every schedule the crate ships, labeled.
pub fn all() -> Vec<(String, TaxSchedule)> {
    let mut out = vec![
        ("income_flat".to_string(), income_flat()),
        ("income_2004".to_string(), income_2004()),
    ];
    for comparator in ComparatorSchedule::shipped() {
        out.push((comparator.country.clone(), comparator.schedule));
    }
    out
}
