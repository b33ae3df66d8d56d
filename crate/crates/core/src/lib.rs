//! Deterministic fiscal rules engine.
//!
//! The crate computes tax liabilities under the Georgian rules, allocates
//! revenue between the state and local budgets, sizes municipal
//! equalization transfers, and runs policy-comparison scenarios. Amounts
//! are integer minor units end to end; intermediate arithmetic is exact
//! rational; every operation rounds half-up exactly once, at its result.
//! All calculators are pure functions over immutable values.

pub mod budget;
pub mod catalog;
pub mod geo_tax;
pub mod money;
pub mod scenarios;
pub mod schedules;
pub mod transfers;

pub use money::{Currency, Decimal, Money, MoneyError, Rational};
pub use schedules::{Bracket, BracketMode, ScheduleError, ScheduleKind, TaxSchedule, Violation};
