//! Fixed-point money and exact decimal scalars.
//!
//! All monetary amounts are integer minor units (tetri, cents). Intermediate
//! arithmetic runs in exact rationals; rounding to minor units happens once,
//! at each operation's final result, half-up.

use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::Signed;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

/// Exact rational used for all intermediate arithmetic.
pub type Rational = Ratio<i128>;

/// Errors raised by money parsing and conversion.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MoneyError {
    #[error("malformed money amount {0:?}: expected digits with an optional sign and at most two decimals")]
    Malformed(String),
    #[error("money amount {0:?} does not fit in 64-bit minor units")]
    Overflow(String),
    #[error("malformed decimal {0:?}")]
    MalformedDecimal(String),
}

/// A monetary amount in integer minor units of an unstated currency.
///
/// Display and serialization use decimal strings with exactly two fraction
/// digits ("125.00"); the internal representation never leaves integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Money(i64);

impl Money {
    pub const ZERO: Money = Money(0);

    /// Builds an amount from minor units (tetri, cents).
    pub const fn from_minor(minor: i64) -> Money {
        Money(minor)
    }

    /// Builds an amount from whole major units (lari, euros, ...).
    pub const fn from_major(major: i64) -> Money {
        Money(major * 100)
    }

    pub const fn minor_units(self) -> i64 {
        self.0
    }

    pub const fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn as_rational(self) -> Rational {
        Rational::from_integer(self.0 as i128)
    }

    /// Rounds an exact minor-unit rational half-up (ties toward +inf).
    pub fn round_half_up(value: Rational) -> Money {
        let shifted = value + Rational::new(1, 2);
        let floored = shifted.floor().to_integer();
        Money(i64::try_from(floored).expect("rounded amount exceeds 64-bit minor units"))
    }

    pub fn checked_add(self, rhs: Money) -> Option<Money> {
        self.0.checked_add(rhs.0).map(Money)
    }

    pub fn checked_sub(self, rhs: Money) -> Option<Money> {
        self.0.checked_sub(rhs.0).map(Money)
    }

    pub fn max(self, rhs: Money) -> Money {
        Money(self.0.max(rhs.0))
    }

    pub fn min(self, rhs: Money) -> Money {
        Money(self.0.min(rhs.0))
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        self.0 -= rhs.0;
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl std::iter::Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, |acc, m| acc + m)
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", abs / 100, abs % 100)
    }
}

impl FromStr for Money {
    type Err = MoneyError;

    /// Parses "1234", "1234.5", "1234.56", "-12.30".
    fn from_str(s: &str) -> Result<Money, MoneyError> {
        let raw = s.trim();
        let (sign, digits) = match raw.strip_prefix('-') {
            Some(rest) => (-1i64, rest),
            None => (1i64, raw.strip_prefix('+').unwrap_or(raw)),
        };
        let (int_part, frac_part) = match digits.split_once('.') {
            Some((i, f)) => (i, f),
            None => (digits, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(MoneyError::Malformed(s.to_string()));
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
            || frac_part.len() > 2
        {
            return Err(MoneyError::Malformed(s.to_string()));
        }
        let int_val: i64 = if int_part.is_empty() {
            0
        } else {
            int_part
                .parse()
                .map_err(|_| MoneyError::Overflow(s.to_string()))?
        };
        let mut frac_val: i64 = if frac_part.is_empty() {
            0
        } else {
            frac_part
                .parse()
                .map_err(|_| MoneyError::Malformed(s.to_string()))?
        };
        if frac_part.len() == 1 {
            frac_val *= 10;
        }
        int_val
            .checked_mul(100)
            .and_then(|v| v.checked_add(frac_val))
            .and_then(|v| v.checked_mul(sign))
            .map(Money)
            .ok_or_else(|| MoneyError::Overflow(s.to_string()))
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Money, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Money;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a decimal money string like \"125.00\"")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Money, E> {
                v.parse().map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Money, E> {
                v.checked_mul(100)
                    .map(Money)
                    .ok_or_else(|| E::custom("whole-unit amount overflows"))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Money, E> {
                i64::try_from(v)
                    .ok()
                    .and_then(|v| v.checked_mul(100))
                    .map(Money)
                    .ok_or_else(|| E::custom("whole-unit amount overflows"))
            }
        }
        deserializer.deserialize_any(V)
    }
}

/// An exact decimal scalar: rates, coefficients, physical quantities.
///
/// Parsed from decimal strings so that "0.18" is exactly 18/100. Arbitrary
/// internal rationals (for example 18/118) never round-trip through this
/// type; configs only ever supply finite decimals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Decimal(Rational);

impl Decimal {
    pub const ZERO: Decimal = Decimal(Rational::new_raw(0, 1));
    pub const ONE: Decimal = Decimal(Rational::new_raw(1, 1));

    pub fn new(numer: i128, denom: i128) -> Decimal {
        Decimal(Rational::new(numer, denom))
    }

    pub fn from_integer(v: i128) -> Decimal {
        Decimal(Rational::from_integer(v))
    }

    pub fn from_rational(r: Rational) -> Decimal {
        Decimal(r)
    }

    pub fn as_rational(self) -> Rational {
        self.0
    }

    pub fn is_negative(self) -> bool {
        self.0.is_negative()
    }

    /// True when the value lies in the closed interval `[lo, hi]`.
    pub fn within(self, lo: Decimal, hi: Decimal) -> bool {
        self >= lo && self <= hi
    }
}

impl FromStr for Decimal {
    type Err = MoneyError;

    fn from_str(s: &str) -> Result<Decimal, MoneyError> {
        let raw = s.trim();
        // Fraction form "n/d" is accepted for completeness.
        if let Some((n, d)) = raw.split_once('/') {
            let numer: i128 = n
                .trim()
                .parse()
                .map_err(|_| MoneyError::MalformedDecimal(s.to_string()))?;
            let denom: i128 = d
                .trim()
                .parse()
                .map_err(|_| MoneyError::MalformedDecimal(s.to_string()))?;
            if denom == 0 {
                return Err(MoneyError::MalformedDecimal(s.to_string()));
            }
            return Ok(Decimal(Rational::new(numer, denom)));
        }
        let (sign, digits) = match raw.strip_prefix('-') {
            Some(rest) => (-1i128, rest),
            None => (1i128, raw.strip_prefix('+').unwrap_or(raw)),
        };
        let (int_part, frac_part) = match digits.split_once('.') {
            Some((i, f)) => (i, f),
            None => (digits, ""),
        };
        if (int_part.is_empty() && frac_part.is_empty())
            || !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
            || frac_part.len() > 18
        {
            return Err(MoneyError::MalformedDecimal(s.to_string()));
        }
        let int_val: i128 = if int_part.is_empty() {
            0
        } else {
            int_part
                .parse()
                .map_err(|_| MoneyError::MalformedDecimal(s.to_string()))?
        };
        let frac_val: i128 = if frac_part.is_empty() {
            0
        } else {
            frac_part
                .parse()
                .map_err(|_| MoneyError::MalformedDecimal(s.to_string()))?
        };
        let scale = 10i128.pow(frac_part.len() as u32);
        Ok(Decimal(Rational::new(
            sign * (int_val * scale + frac_val),
            scale,
        )))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut denom = *self.0.denom();
        let mut scale = 0u32;
        while denom % 2 == 0 {
            denom /= 2;
            scale += 1;
        }
        let mut fives = 0u32;
        while denom % 5 == 0 {
            denom /= 5;
            fives += 1;
        }
        if denom != 1 {
            // Non-terminating decimal: emit the exact fraction.
            return write!(f, "{}/{}", self.0.numer(), self.0.denom());
        }
        let digits = scale.max(fives);
        let scaled = self.0 * Rational::from_integer(10i128.pow(digits));
        let v = scaled.to_integer();
        if digits == 0 {
            return write!(f, "{v}");
        }
        let sign = if v < 0 { "-" } else { "" };
        let abs = v.unsigned_abs();
        let pow = 10u128.pow(digits);
        write!(
            f,
            "{sign}{}.{:0width$}",
            abs / pow,
            abs % pow,
            width = digits as usize
        )
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Decimal, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Decimal;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a decimal string like \"0.18\" or a number")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Decimal, E> {
                v.parse().map_err(E::custom)
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Decimal, E> {
                // Shortest round-trip text recovers the intended decimal.
                format!("{v}").parse().map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Decimal, E> {
                Ok(Decimal::from_integer(v as i128))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Decimal, E> {
                Ok(Decimal::from_integer(v as i128))
            }
        }
        deserializer.deserialize_any(V)
    }
}

/// ISO currency code; comparisons are the only supported operation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Currency(pub String);

impl Currency {
    pub fn gel() -> Currency {
        Currency("GEL".to_string())
    }
}

impl fmt::Display for Currency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Currency {
    fn from(s: &str) -> Currency {
        Currency(s.to_string())
    }
}
