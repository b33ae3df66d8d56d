//! Calculators for the Georgian tax rules, dispatching over typed tax events.
//!
//! All calculators are pure: they take validated records, run exact rational
//! arithmetic, and round half-up once at the result. Rule constants (rates,
//! thresholds, the vehicle duty formula) live here; excise unit rates and
//! land/municipal rates are caller-supplied because statute differentiates
//! them by territory and good.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::money::{Currency, Decimal, Money, Rational};
use crate::schedules::{ScheduleError, TaxSchedule};

// Rational constants are stored in lowest terms: `new_raw` skips reduction.

/// Flat income-tax rate in force since 2009: 20%.
pub const INCOME_TAX_RATE: Rational = Rational::new_raw(1, 5);
/// Profit-tax rate, both classic and distribution-based models: 15%.
pub const PROFIT_TAX_RATE: Rational = Rational::new_raw(3, 20);
/// VAT rate on domestic turnover and imports: 18%.
pub const VAT_RATE: Rational = Rational::new_raw(9, 50);
/// VAT share of a tax-inclusive advance receipt: 18/118.
pub const ADVANCE_VAT_RATE: Rational = Rational::new_raw(9, 59);
/// Monthly charge on temporarily imported goods: 0.54% of the would-be VAT.
pub const TEMPORARY_VAT_MONTHLY_RATE: Rational = Rational::new_raw(27, 5_000);
/// One-time duty on temporary imports: 3% of the would-be full-import duty.
pub const TEMPORARY_IMPORT_DUTY_RATE: Rational = Rational::new_raw(3, 100);
/// Vehicle import duty: 0.05 GEL per engine cm³.
pub const VEHICLE_DUTY_PER_CC: Rational = Rational::new_raw(1, 20);
/// Vehicle import duty surcharge per year in service: 5% of the base duty.
pub const VEHICLE_DUTY_AGE_RATE: Rational = Rational::new_raw(1, 20);
/// Non-agricultural land: 0.24 GEL per m² per year before the territorial coefficient.
pub const NONAGRI_LAND_RATE_PER_M2: Rational = Rational::new_raw(6, 25);

/// Annual-turnover ceiling for micro-business status (exclusive).
pub const MICRO_TURNOVER_LIMIT: Money = Money::from_major(30_000);
/// Annual-turnover ceiling for small-business status (exclusive).
pub const SMALL_TURNOVER_LIMIT: Money = Money::from_major(100_000);
/// Rolling-12-month taxable operations above this require VAT registration (strict).
pub const VAT_REGISTRATION_THRESHOLD: Money = Money::from_major(100_000);
/// Family annual income at or above which the upper household property band applies.
pub const HOUSEHOLD_INCOME_SPLIT: Money = Money::from_major(100_000);
/// Family annual income above which vehicles become taxable property (strict).
pub const VEHICLE_TAX_INCOME_THRESHOLD: Money = Money::from_major(40_000);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TaxError {
    #[error("currency mismatch: schedule is {schedule}, record is {record}")]
    CurrencyMismatch { schedule: Currency, record: Currency },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("regime {found} is not handled by this calculator")]
    WrongRegime { found: Regime },
    #[error("micro status requires turnover under {limit} and no hired labor (turnover {turnover}, hired labor {employs_hired_labor})", limit = MICRO_TURNOVER_LIMIT)]
    MicroIneligible { turnover: Money, employs_hired_labor: bool },
    #[error("small status requires turnover under {limit} (turnover {turnover})", limit = SMALL_TURNOVER_LIMIT)]
    SmallIneligible { turnover: Money },
    #[error("{field} must not be negative")]
    NegativeAmount { field: &'static str },
    #[error("temporary operations require at least one (possibly partial) month")]
    ZeroMonths,
    #[error("municipal rate {rate} outside band [{low},{high}] for family income {income}")]
    RateBandViolation { rate: Decimal, low: Decimal, high: Decimal, income: Money },
    #[error("territorial coefficient {coefficient} outside (0,1.5]")]
    CoefficientOutOfRange { coefficient: Decimal },
    #[error("leasing rate {rate} outside (0,0.006]")]
    LeaseRateOutOfRange { rate: Decimal },
    #[error("enterprise property rate {rate} outside (0,0.01]")]
    PropertyRateOutOfRange { rate: Decimal },
    #[error("declaration is invalid: {0}")]
    InvalidDeclaration(String),
    #[error("excise base {base} does not match the measurement base of category {category}")]
    ExciseBaseMismatch { category: ExciseCategory, base: &'static str },
    #[error("excise rate form does not match the measurement base: {0}")]
    ExciseRateMismatch(&'static str),
}

/// A violated record invariant, reported field by field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldViolation {
    pub field: &'static str,
    pub message: String,
}

impl FieldViolation {
    fn new(field: &'static str, message: impl Into<String>) -> FieldViolation {
        FieldViolation { field, message: message.into() }
    }
}

impl std::fmt::Display for FieldViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn require_non_negative(out: &mut Vec<FieldViolation>, field: &'static str, amount: Money) {
    if amount.is_negative() {
        out.push(FieldViolation::new(field, "must not be negative"));
    }
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonRecord {
    pub monthly_income: Money,
    pub annual_family_income: Money,
    /// Vehicle ages in whole years.
    #[serde(default)]
    pub vehicles: Vec<u32>,
    #[serde(default)]
    pub properties: Vec<PropertyItem>,
    pub currency: Currency,
}

impl PersonRecord {
    pub fn validate(&self) -> Vec<FieldViolation> {
        let mut out = Vec::new();
        require_non_negative(&mut out, "monthly_income", self.monthly_income);
        require_non_negative(&mut out, "annual_family_income", self.annual_family_income);
        for item in &self.properties {
            out.extend(item.validate());
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Standard,
    Micro,
    Small,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Standard => "standard",
            Regime::Micro => "micro",
            Regime::Small => "small",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnterpriseRecord {
    pub regime: Regime,
    pub taxable_profit: Money,
    pub distributed_profit: Money,
    pub non_business_expense: Money,
    pub asset_value_begin: Money,
    pub asset_value_end: Money,
    pub annual_turnover: Money,
    /// Share of income backed by expense documents, in [0,1].
    pub documented_expense_share: Decimal,
    pub employs_hired_labor: bool,
}

impl EnterpriseRecord {
    pub fn validate(&self) -> Vec<FieldViolation> {
        let mut out = Vec::new();
        require_non_negative(&mut out, "taxable_profit", self.taxable_profit);
        require_non_negative(&mut out, "distributed_profit", self.distributed_profit);
        require_non_negative(&mut out, "non_business_expense", self.non_business_expense);
        require_non_negative(&mut out, "asset_value_begin", self.asset_value_begin);
        require_non_negative(&mut out, "asset_value_end", self.asset_value_end);
        require_non_negative(&mut out, "annual_turnover", self.annual_turnover);
        if !self.documented_expense_share.within(Decimal::ZERO, Decimal::ONE) {
            out.push(FieldViolation::new("documented_expense_share", "must lie in [0,1]"));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "operation")]
pub enum ImportOperation {
    Import,
    /// Months count every full and partial calendar month on customs territory.
    TemporaryImport { months: u32 },
    Export,
    Reexport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DutyClass {
    Pct12,
    Pct5,
    Exempt,
}

impl DutyClass {
    pub fn rate(self) -> Rational {
        match self {
            DutyClass::Pct12 => Rational::new_raw(12, 100),
            DutyClass::Pct5 => Rational::new_raw(5, 100),
            DutyClass::Exempt => Rational::zero(),
        }
    }
}

/// Goods with a duty regime of their own, replacing the ad valorem classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "goods")]
pub enum ImportGoods {
    Vehicle {
        engine_cc: u32,
        years_in_service: u32,
    },
    Alcohol {
        liters: Decimal,
        /// Alcohol content in percent points.
        abv: Decimal,
        /// Duty per abv percent point per 100 liters.
        unit_rate: Money,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportDeclaration {
    #[serde(flatten)]
    pub operation: ImportOperation,
    pub customs_value: Money,
    pub duty_class: DutyClass,
    /// Excise already computed for the goods; zero when none applies.
    #[serde(default)]
    pub excise_amount: Money,
    #[serde(default, flatten, skip_serializing_if = "Option::is_none")]
    pub goods: Option<ImportGoods>,
}

impl ImportDeclaration {
    pub fn validate(&self) -> Vec<FieldViolation> {
        let mut out = Vec::new();
        require_non_negative(&mut out, "customs_value", self.customs_value);
        require_non_negative(&mut out, "excise_amount", self.excise_amount);
        if let ImportOperation::TemporaryImport { months } = self.operation {
            if months < 1 {
                out.push(FieldViolation::new("months", "temporary import requires months >= 1"));
            }
        }
        match &self.goods {
            Some(ImportGoods::Vehicle { engine_cc, .. }) => {
                if *engine_cc == 0 {
                    out.push(FieldViolation::new("engine_cc", "must be positive"));
                }
            }
            Some(ImportGoods::Alcohol { liters, abv, unit_rate }) => {
                if liters.is_negative() {
                    out.push(FieldViolation::new("liters", "must not be negative"));
                }
                if !abv.within(Decimal::ZERO, Decimal::from_integer(100)) {
                    out.push(FieldViolation::new("abv", "must lie in [0,100]"));
                }
                require_non_negative(&mut out, "unit_rate", *unit_rate);
            }
            None => {}
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PropertyItem {
    /// Enterprise assets averaged over the calendar year; the base is lifted
    /// to market value when market exceeds the book average.
    EnterpriseAssets {
        begin: Money,
        end: Money,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        market_value: Option<Money>,
        rate: Decimal,
    },
    Household {
        market_value: Money,
        municipal_rate: Decimal,
    },
    Leased {
        initial_book_value: Money,
        rate: Decimal,
    },
    Vehicle {
        age_years: u32,
    },
    AgriLand {
        hectares: Decimal,
        per_ha_rate: Money,
    },
    NonagriLand {
        area_m2: Decimal,
        territorial_coefficient: Decimal,
    },
}

impl PropertyItem {
    pub fn validate(&self) -> Vec<FieldViolation> {
        let mut out = Vec::new();
        match self {
            PropertyItem::EnterpriseAssets { begin, end, market_value, rate } => {
                require_non_negative(&mut out, "begin", *begin);
                require_non_negative(&mut out, "end", *end);
                if let Some(mv) = market_value {
                    require_non_negative(&mut out, "market_value", *mv);
                }
                if rate.is_negative() || *rate > Decimal::new(1, 100) {
                    out.push(FieldViolation::new("rate", "must lie in (0,0.01]"));
                }
            }
            PropertyItem::Household { market_value, municipal_rate } => {
                require_non_negative(&mut out, "market_value", *market_value);
                if municipal_rate.is_negative() {
                    out.push(FieldViolation::new("municipal_rate", "must not be negative"));
                }
            }
            PropertyItem::Leased { initial_book_value, rate } => {
                require_non_negative(&mut out, "initial_book_value", *initial_book_value);
                if rate.is_negative() || *rate > Decimal::new(6, 1000) {
                    out.push(FieldViolation::new("rate", "must lie in (0,0.006]"));
                }
            }
            PropertyItem::Vehicle { .. } => {}
            PropertyItem::AgriLand { hectares, per_ha_rate } => {
                if hectares.is_negative() {
                    out.push(FieldViolation::new("hectares", "must not be negative"));
                }
                require_non_negative(&mut out, "per_ha_rate", *per_ha_rate);
            }
            PropertyItem::NonagriLand { area_m2, territorial_coefficient } => {
                if area_m2.is_negative() {
                    out.push(FieldViolation::new("area_m2", "must not be negative"));
                }
                if !territorial_coefficient.within(Decimal::ZERO, Decimal::new(15, 10))
                    || *territorial_coefficient == Decimal::ZERO
                {
                    out.push(FieldViolation::new("territorial_coefficient", "must lie in (0,1.5]"));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExciseCategory {
    Alcohol,
    Tobacco,
    OilProducts,
    DistilledOils,
    OilGases,
    Additives,
    Lubricants,
    Vehicles,
    NaturalGas,
    MobileServices,
}

impl std::fmt::Display for ExciseCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ExciseCategory::Alcohol => "alcohol",
            ExciseCategory::Tobacco => "tobacco",
            ExciseCategory::OilProducts => "oil_products",
            ExciseCategory::DistilledOils => "distilled_oils",
            ExciseCategory::OilGases => "oil_gases",
            ExciseCategory::Additives => "additives",
            ExciseCategory::Lubricants => "lubricants",
            ExciseCategory::Vehicles => "vehicles",
            ExciseCategory::NaturalGas => "natural_gas",
            ExciseCategory::MobileServices => "mobile_services",
        })
    }
}

/// How the taxable quantity of an excisable good is measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "base")]
pub enum ExciseBase {
    Volume { liters: Decimal },
    QuantityOrWeight { units: Decimal },
    WeightOrVolume { units: Decimal },
    Vehicle { engine_cc: u32, age_years: u32 },
    GasVolume { cubic_meters: Decimal },
    Compensation { amount: Money },
}

impl ExciseBase {
    fn name(&self) -> &'static str {
        match self {
            ExciseBase::Volume { .. } => "volume",
            ExciseBase::QuantityOrWeight { .. } => "quantity_or_weight",
            ExciseBase::WeightOrVolume { .. } => "weight_or_volume",
            ExciseBase::Vehicle { .. } => "vehicle",
            ExciseBase::GasVolume { .. } => "gas_volume",
            ExciseBase::Compensation { .. } => "compensation",
        }
    }
}

/// Excise rates are statute-differentiated; the table is configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExciseRate {
    /// Currency per measurement unit (liter, unit, cm³, m³).
    PerUnit(Money),
    /// Share of the compensation amount, for services taxed ad valorem.
    Fraction(Decimal),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExciseItem {
    pub category: ExciseCategory,
    #[serde(flatten)]
    pub base: ExciseBase,
    pub unit_rate: ExciseRate,
}

impl ExciseItem {
    pub fn validate(&self) -> Vec<FieldViolation> {
        let mut out = Vec::new();
        match &self.base {
            ExciseBase::Volume { liters: q }
            | ExciseBase::QuantityOrWeight { units: q }
            | ExciseBase::WeightOrVolume { units: q }
            | ExciseBase::GasVolume { cubic_meters: q } => {
                if q.is_negative() {
                    out.push(FieldViolation::new("quantity", "must not be negative"));
                }
            }
            ExciseBase::Vehicle { .. } => {}
            ExciseBase::Compensation { amount } => {
                require_non_negative(&mut out, "compensation", *amount);
            }
        }
        match self.unit_rate {
            ExciseRate::PerUnit(rate) => require_non_negative(&mut out, "unit_rate", rate),
            ExciseRate::Fraction(f) => {
                if f.is_negative() {
                    out.push(FieldViolation::new("unit_rate", "fraction must not be negative"));
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Income tax on monthly income under the supplied schedule.
pub fn income_tax(person: &PersonRecord, schedule: &TaxSchedule) -> Result<Money, TaxError> {
    if person.currency != schedule.currency {
        return Err(TaxError::CurrencyMismatch {
            schedule: schedule.currency.clone(),
            record: person.currency.clone(),
        });
    }
    Ok(schedule.evaluate(person.monthly_income)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfitModel {
    /// 15% of annual taxable profit.
    Classic,
    /// 15% of distributed profit plus non-business expense; retained
    /// profit stays untaxed.
    Estonian,
}

/// Profit tax for standard-regime enterprises.
///
/// Under the distribution-based model, `gross_up` treats the distribution as
/// a net amount and divides the base by 0.85 before applying the rate.
pub fn profit_tax(ent: &EnterpriseRecord, model: ProfitModel, gross_up: bool) -> Result<Money, TaxError> {
    if ent.regime != Regime::Standard {
        return Err(TaxError::WrongRegime { found: ent.regime });
    }
    let base = match model {
        ProfitModel::Classic => ent.taxable_profit.as_rational(),
        ProfitModel::Estonian => {
            let net = (ent.distributed_profit + ent.non_business_expense).as_rational();
            if gross_up {
                net / Rational::new(85, 100)
            } else {
                net
            }
        }
    };
    Ok(Money::round_half_up(PROFIT_TAX_RATE * base))
}

/// Turnover-based tax for micro and small business regimes.
pub fn turnover_regime_tax(ent: &EnterpriseRecord) -> Result<Money, TaxError> {
    match ent.regime {
        Regime::Standard => Err(TaxError::WrongRegime { found: ent.regime }),
        Regime::Micro => {
            if ent.annual_turnover >= MICRO_TURNOVER_LIMIT || ent.employs_hired_labor {
                return Err(TaxError::MicroIneligible {
                    turnover: ent.annual_turnover,
                    employs_hired_labor: ent.employs_hired_labor,
                });
            }
            Ok(Money::ZERO)
        }
        Regime::Small => {
            if ent.annual_turnover >= SMALL_TURNOVER_LIMIT {
                return Err(TaxError::SmallIneligible { turnover: ent.annual_turnover });
            }
            let rate = if ent.documented_expense_share >= Decimal::new(60, 100) {
                Rational::new(3, 100)
            } else {
                Rational::new(5, 100)
            };
            Ok(Money::round_half_up(rate * ent.annual_turnover.as_rational()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "event")]
pub enum VatEvent {
    Domestic { turnover: Money },
    Import { customs_value: Money, duty: Money, excise: Money },
    /// A VAT-inclusive advance receipt.
    Advance { gross: Money },
    /// Temporary import: per-month charge on the VAT full import would incur.
    Temporary { would_be_vat: Money, months: u32 },
    ExportOrReexport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VatOutcome {
    pub tax: Money,
    /// Export and re-export keep the right to credit input VAT.
    pub input_credit: bool,
}

/// VAT due on a taxable event.
pub fn vat(event: VatEvent) -> Result<VatOutcome, TaxError> {
    let exact = vat_exact(event)?;
    Ok(VatOutcome {
        tax: Money::round_half_up(exact),
        input_credit: matches!(event, VatEvent::ExportOrReexport),
    })
}

/// Exact rational VAT, before the final rounding step.
pub fn vat_exact(event: VatEvent) -> Result<Rational, TaxError> {
    let non_negative = |amount: Money, field: &'static str| {
        if amount.is_negative() {
            Err(TaxError::NegativeAmount { field })
        } else {
            Ok(amount)
        }
    };
    match event {
        VatEvent::Domestic { turnover } => {
            Ok(VAT_RATE * non_negative(turnover, "turnover")?.as_rational())
        }
        VatEvent::Import { customs_value, duty, excise } => {
            let base = non_negative(customs_value, "customs_value")?
                + non_negative(duty, "duty")?
                + non_negative(excise, "excise")?;
            Ok(VAT_RATE * base.as_rational())
        }
        VatEvent::Advance { gross } => {
            Ok(ADVANCE_VAT_RATE * non_negative(gross, "gross")?.as_rational())
        }
        VatEvent::Temporary { would_be_vat, months } => {
            if months < 1 {
                return Err(TaxError::ZeroMonths);
            }
            Ok(Rational::from_integer(months as i128)
                * TEMPORARY_VAT_MONTHLY_RATE
                * non_negative(would_be_vat, "would_be_vat")?.as_rational())
        }
        VatEvent::ExportOrReexport => Ok(Rational::zero()),
    }
}

/// True when rolling 12-month taxable operations strictly exceed the threshold.
pub fn vat_registration_required(rolling_12mo_taxable_ops: Money) -> bool {
    rolling_12mo_taxable_ops > VAT_REGISTRATION_THRESHOLD
}

/// Import duty for a declaration.
///
/// Vehicles and alcohol carry their own regimes and override the ad valorem
/// class; temporary import owes a one-time 3% of the would-be full duty.
pub fn import_duty(decl: &ImportDeclaration) -> Result<Money, TaxError> {
    let violations = decl.validate();
    if !violations.is_empty() {
        let msg = violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ");
        return Err(TaxError::InvalidDeclaration(msg));
    }
    let exact = match decl.operation {
        ImportOperation::Export | ImportOperation::Reexport => Rational::zero(),
        ImportOperation::Import => full_import_duty(decl),
        ImportOperation::TemporaryImport { .. } => {
            TEMPORARY_IMPORT_DUTY_RATE * full_import_duty(decl)
        }
    };
    Ok(Money::round_half_up(exact))
}

fn full_import_duty(decl: &ImportDeclaration) -> Rational {
    match &decl.goods {
        Some(ImportGoods::Vehicle { engine_cc, years_in_service }) => {
            // T = V*0.05 + (V*0.05)*5%*Y, in major units per cm³.
            let base = VEHICLE_DUTY_PER_CC * Rational::from_integer(*engine_cc as i128) * Rational::from_integer(100);
            base + base * VEHICLE_DUTY_AGE_RATE * Rational::from_integer(*years_in_service as i128)
        }
        Some(ImportGoods::Alcohol { liters, abv, unit_rate }) => {
            unit_rate.as_rational() * abv.as_rational() * (liters.as_rational() / Rational::from_integer(100))
        }
        None => decl.duty_class.rate() * decl.customs_value.as_rational(),
    }
}

/// Excise due on one item; rates must match the category's measurement base.
pub fn excise(item: &ExciseItem) -> Result<Money, TaxError> {
    let expected: &'static str = match item.category {
        ExciseCategory::Alcohol => "volume",
        ExciseCategory::Tobacco => "quantity_or_weight",
        ExciseCategory::OilProducts
        | ExciseCategory::DistilledOils
        | ExciseCategory::OilGases
        | ExciseCategory::Additives
        | ExciseCategory::Lubricants => "weight_or_volume",
        ExciseCategory::Vehicles => "vehicle",
        ExciseCategory::NaturalGas => "gas_volume",
        ExciseCategory::MobileServices => "compensation",
    };
    if item.base.name() != expected {
        return Err(TaxError::ExciseBaseMismatch { category: item.category, base: item.base.name() });
    }
    let exact = match (&item.base, item.unit_rate) {
        (ExciseBase::Compensation { amount }, ExciseRate::Fraction(f)) => {
            f.as_rational() * amount.as_rational()
        }
        (ExciseBase::Compensation { .. }, ExciseRate::PerUnit(_)) => {
            return Err(TaxError::ExciseRateMismatch("compensation base needs a fraction rate"))
        }
        (base, ExciseRate::PerUnit(rate)) => {
            let quantity = match base {
                ExciseBase::Volume { liters: q }
                | ExciseBase::QuantityOrWeight { units: q }
                | ExciseBase::WeightOrVolume { units: q }
                | ExciseBase::GasVolume { cubic_meters: q } => q.as_rational(),
                ExciseBase::Vehicle { engine_cc, .. } => Rational::from_integer(*engine_cc as i128),
                ExciseBase::Compensation { .. } => unreachable!(),
            };
            rate.as_rational() * quantity
        }
        (_, ExciseRate::Fraction(_)) => {
            return Err(TaxError::ExciseRateMismatch("physical bases need a per-unit rate"))
        }
    };
    Ok(Money::round_half_up(exact))
}

/// Annual property tax on one item.
///
/// `family_annual_income` drives the household rate bands and the vehicle
/// threshold; it is ignored for enterprise, leased, and land items.
pub fn property_tax(item: &PropertyItem, family_annual_income: Money) -> Result<Money, TaxError> {
    let exact = match item {
        PropertyItem::EnterpriseAssets { begin, end, market_value, rate } => {
            if rate.is_negative() || *rate > Decimal::new(1, 100) {
                return Err(TaxError::PropertyRateOutOfRange { rate: *rate });
            }
            let book = (begin.as_rational() + end.as_rational()) / Rational::from_integer(2);
            let base = match market_value {
                Some(mv) if mv.as_rational() > book => mv.as_rational(),
                _ => book,
            };
            rate.as_rational() * base
        }
        PropertyItem::Household { market_value, municipal_rate } => {
            let (low, high) = if family_annual_income < HOUSEHOLD_INCOME_SPLIT {
                (Decimal::new(5, 10_000), Decimal::new(2, 1_000))
            } else {
                (Decimal::new(8, 1_000), Decimal::new(1, 100))
            };
            if !municipal_rate.within(low, high) {
                return Err(TaxError::RateBandViolation {
                    rate: *municipal_rate,
                    low,
                    high,
                    income: family_annual_income,
                });
            }
            municipal_rate.as_rational() * market_value.as_rational()
        }
        PropertyItem::Leased { initial_book_value, rate } => {
            if rate.is_negative() || *rate == Decimal::ZERO || *rate > Decimal::new(6, 1000) {
                return Err(TaxError::LeaseRateOutOfRange { rate: *rate });
            }
            rate.as_rational() * initial_book_value.as_rational()
        }
        PropertyItem::Vehicle { age_years } => {
            if family_annual_income <= VEHICLE_TAX_INCOME_THRESHOLD {
                Rational::zero()
            } else {
                vehicle_property_tax_amount(*age_years).as_rational()
            }
        }
        PropertyItem::AgriLand { hectares, per_ha_rate } => {
            per_ha_rate.as_rational() * hectares.as_rational()
        }
        PropertyItem::NonagriLand { area_m2, territorial_coefficient } => {
            if !territorial_coefficient.within(Decimal::ZERO, Decimal::new(15, 10))
                || *territorial_coefficient == Decimal::ZERO
            {
                return Err(TaxError::CoefficientOutOfRange {
                    coefficient: *territorial_coefficient,
                });
            }
            // 0.24 GEL/m² expressed in minor units.
            NONAGRI_LAND_RATE_PER_M2
                * Rational::from_integer(100)
                * territorial_coefficient.as_rational()
                * area_m2.as_rational()
        }
    };
    Ok(Money::round_half_up(exact))
}

/// The step table for vehicle property tax by age, before the income threshold.
pub fn vehicle_property_tax_amount(age_years: u32) -> Money {
    match age_years {
        0..=1 => Money::from_major(500),
        2..=5 => Money::from_major(240),
        6..=10 => Money::from_major(120),
        _ => Money::from_major(60),
    }
}
