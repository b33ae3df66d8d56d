//! Tax-schedule data model and evaluator.
//!
//! Four schedule kinds are supported: proportional (one flat rate),
//! progressive and regressive (bracket tables, marginal by default),
//! and fixed (a flat sum per activity). Every schedule may carry a
//! non-taxable minimum that is subtracted from the base, floored at
//! zero, before any rate applies.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::money::{Currency, Decimal, Money, Rational};

/// One bracket slice: `[lower, upper)` taxed at `rate`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bracket {
    pub lower: Money,
    /// Exclusive upper bound; `None` means unbounded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<Money>,
    pub rate: Decimal,
}

impl Bracket {
    pub fn new(lower: Money, upper: Option<Money>, rate: Decimal) -> Bracket {
        Bracket { lower, upper, rate }
    }
}

/// How bracket tables apply to the base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BracketMode {
    /// Each bracket slice of the base is taxed at that bracket's rate.
    #[default]
    Marginal,
    /// The whole base is taxed at the rate of the bracket containing it.
    Slab,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ScheduleKind {
    Proportional {
        rate: Decimal,
    },
    Progressive {
        brackets: Vec<Bracket>,
        #[serde(default)]
        mode: BracketMode,
    },
    Regressive {
        brackets: Vec<Bracket>,
        #[serde(default)]
        mode: BracketMode,
    },
    /// A fixed sum per activity category; zero base owes nothing.
    Fixed {
        amount: Money,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxSchedule {
    #[serde(flatten)]
    pub kind: ScheduleKind,
    #[serde(default)]
    pub non_taxable_minimum: Money,
    pub currency: Currency,
}

/// A violated schedule invariant. Violations are data, not faults:
/// `validate` reports all of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    NegativeMinimum { minimum: Money },
    RateOutOfRange { bracket: Option<usize>, rate: Decimal },
    NegativeFixedAmount { amount: Money },
    EmptyBrackets,
    FirstLowerNotZero { lower: Money },
    BoundsOutOfOrder { bracket: usize },
    UnboundedBracketNotLast { bracket: usize },
    Gap { from: Money, to: Money },
    Overlap { from: Money, to: Money },
    NonMonotoneRates { bracket: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NegativeMinimum { minimum } => {
                write!(f, "non-taxable minimum {minimum} is negative")
            }
            Violation::RateOutOfRange { bracket: Some(i), rate } => {
                write!(f, "bracket {i} rate {rate} outside [0,1]")
            }
            Violation::RateOutOfRange { bracket: None, rate } => {
                write!(f, "rate {rate} outside [0,1]")
            }
            Violation::NegativeFixedAmount { amount } => {
                write!(f, "fixed amount {amount} is negative")
            }
            Violation::EmptyBrackets => f.write_str("bracket table is empty"),
            Violation::FirstLowerNotZero { lower } => {
                write!(f, "first bracket starts at {lower}, expected 0.00")
            }
            Violation::BoundsOutOfOrder { bracket } => {
                write!(f, "bracket {bracket} has lower >= upper")
            }
            Violation::UnboundedBracketNotLast { bracket } => {
                write!(f, "unbounded bracket {bracket} is not last")
            }
            Violation::Gap { from, to } => write!(f, "gap at [{from},{to})"),
            Violation::Overlap { from, to } => write!(f, "overlap at [{from},{to})"),
            Violation::NonMonotoneRates { bracket } => {
                write!(f, "bracket {bracket} breaks the rate monotonicity of this schedule kind")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScheduleError {
    #[error("base {0} is negative")]
    NegativeBase(Money),
    #[error("effective rate is undefined for a zero base")]
    ZeroBase,
    #[error("schedule is invalid: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("base {base} lies beyond the coverage of the bounded bracket table")]
    BeyondCoverage { base: Money },
}

fn format_violations(vs: &[Violation]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

impl TaxSchedule {
    pub fn proportional(rate: Decimal, currency: Currency) -> TaxSchedule {
        TaxSchedule {
            kind: ScheduleKind::Proportional { rate },
            non_taxable_minimum: Money::ZERO,
            currency,
        }
    }

    pub fn progressive(brackets: Vec<Bracket>, currency: Currency) -> TaxSchedule {
        TaxSchedule {
            kind: ScheduleKind::Progressive { brackets, mode: BracketMode::Marginal },
            non_taxable_minimum: Money::ZERO,
            currency,
        }
    }

    pub fn regressive(brackets: Vec<Bracket>, currency: Currency) -> TaxSchedule {
        TaxSchedule {
            kind: ScheduleKind::Regressive { brackets, mode: BracketMode::Marginal },
            non_taxable_minimum: Money::ZERO,
            currency,
        }
    }

    pub fn fixed(amount: Money, currency: Currency) -> TaxSchedule {
        TaxSchedule {
            kind: ScheduleKind::Fixed { amount },
            non_taxable_minimum: Money::ZERO,
            currency,
        }
    }

    pub fn with_minimum(mut self, minimum: Money) -> TaxSchedule {
        self.non_taxable_minimum = minimum;
        self
    }

    /// Reports every violated invariant; an empty list means the schedule is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.non_taxable_minimum.is_negative() {
            out.push(Violation::NegativeMinimum { minimum: self.non_taxable_minimum });
        }
        match &self.kind {
            ScheduleKind::Proportional { rate } => {
                if !rate.within(Decimal::ZERO, Decimal::ONE) {
                    out.push(Violation::RateOutOfRange { bracket: None, rate: *rate });
                }
            }
            ScheduleKind::Fixed { amount } => {
                if amount.is_negative() {
                    out.push(Violation::NegativeFixedAmount { amount: *amount });
                }
            }
            ScheduleKind::Progressive { brackets, .. } => {
                validate_brackets(brackets, RateOrder::NonDecreasing, &mut out);
            }
            ScheduleKind::Regressive { brackets, .. } => {
                validate_brackets(brackets, RateOrder::NonIncreasing, &mut out);
            }
        }
        out
    }

    /// Evaluates the tax due on `base`, rounded half-up to minor units.
    pub fn evaluate(&self, base: Money) -> Result<Money, ScheduleError> {
        self.evaluate_exact(base).map(Money::round_half_up)
    }

    /// Exact rational tax on `base`, before the final rounding step.
    pub fn evaluate_exact(&self, base: Money) -> Result<Rational, ScheduleError> {
        if base.is_negative() {
            return Err(ScheduleError::NegativeBase(base));
        }
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(ScheduleError::Invalid(violations));
        }
        let effective = (base - self.non_taxable_minimum).max(Money::ZERO);
        match &self.kind {
            ScheduleKind::Proportional { rate } => Ok(rate.as_rational() * effective.as_rational()),
            ScheduleKind::Fixed { amount } => {
                if effective == Money::ZERO {
                    Ok(Rational::zero())
                } else {
                    Ok(amount.as_rational())
                }
            }
            ScheduleKind::Progressive { brackets, mode }
            | ScheduleKind::Regressive { brackets, mode } => match mode {
                BracketMode::Marginal => marginal_tax(brackets, effective, base),
                BracketMode::Slab => slab_tax(brackets, effective, base),
            },
        }
    }

    /// `evaluate / base` as an exact fraction, before rounding.
    pub fn effective_rate(&self, base: Money) -> Result<Rational, ScheduleError> {
        if base == Money::ZERO {
            return Err(ScheduleError::ZeroBase);
        }
        Ok(self.evaluate_exact(base)? / base.as_rational())
    }
}

enum RateOrder {
    NonDecreasing,
    NonIncreasing,
}

fn validate_brackets(brackets: &[Bracket], order: RateOrder, out: &mut Vec<Violation>) {
    if brackets.is_empty() {
        out.push(Violation::EmptyBrackets);
        return;
    }
    if brackets[0].lower != Money::ZERO {
        out.push(Violation::FirstLowerNotZero { lower: brackets[0].lower });
    }
    for (i, b) in brackets.iter().enumerate() {
        if !b.rate.within(Decimal::ZERO, Decimal::ONE) {
            out.push(Violation::RateOutOfRange { bracket: Some(i), rate: b.rate });
        }
        match b.upper {
            Some(upper) => {
                if b.lower >= upper {
                    out.push(Violation::BoundsOutOfOrder { bracket: i });
                }
            }
            None => {
                if i + 1 != brackets.len() {
                    out.push(Violation::UnboundedBracketNotLast { bracket: i });
                }
            }
        }
        if i > 0 {
            if let Some(prev_upper) = brackets[i - 1].upper {
                if b.lower > prev_upper {
                    out.push(Violation::Gap { from: prev_upper, to: b.lower });
                } else if b.lower < prev_upper {
                    out.push(Violation::Overlap { from: b.lower, to: prev_upper });
                }
            }
            let monotone = match order {
                RateOrder::NonDecreasing => b.rate >= brackets[i - 1].rate,
                RateOrder::NonIncreasing => b.rate <= brackets[i - 1].rate,
            };
            if !monotone {
                out.push(Violation::NonMonotoneRates { bracket: i });
            }
        }
    }
}

fn marginal_tax(brackets: &[Bracket], effective: Money, base: Money) -> Result<Rational, ScheduleError> {
    if let Some(Some(top)) = brackets.last().map(|b| b.upper) {
        if effective > top {
            return Err(ScheduleError::BeyondCoverage { base });
        }
    }
    let mut tax = Rational::zero();
    for b in brackets {
        let slice_top = match b.upper {
            Some(upper) => effective.min(upper),
            None => effective,
        };
        if slice_top > b.lower {
            tax += b.rate.as_rational() * (slice_top - b.lower).as_rational();
        }
    }
    Ok(tax)
}

fn slab_tax(brackets: &[Bracket], effective: Money, base: Money) -> Result<Rational, ScheduleError> {
    for b in brackets {
        let contains = effective >= b.lower && b.upper.is_none_or(|u| effective < u);
        if contains {
            return Ok(b.rate.as_rational() * effective.as_rational());
        }
    }
    Err(ScheduleError::BeyondCoverage { base })
}
